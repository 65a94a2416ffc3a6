"""Convergence measures: duality gap, proximal residual, weighted distances
to a known solution set, and the sharpness ratio."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_GAP_CLIP = 1e-10


def duality_gap(problem, x, y):
    """max_y' f(x, y') - min_x' f(x', y) for a bilinear game, in closed form.

    Needs inner maximizations that are analytically solvable: simplexes,
    products of simplexes, or boxes on either side.
    """
    if problem.structure is None:
        raise ValueError("duality gap needs a bilinear problem")
    s = problem.structure
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    primal_set, dual_set = problem.set.parts
    best_response_y = dual_set.support_max(s.A.T @ x + s.by) + float(s.bx @ x)
    best_response_x = -primal_set.support_max(-(s.A @ y + s.bx)) + float(s.by @ y)
    return best_response_y - best_response_x


def duality_gap_at(problem, z):
    if problem.structure is None:
        raise ValueError("duality gap needs a bilinear problem")
    x, y = problem.split(np.asarray(z, dtype=np.float64))
    return duality_gap(problem, x, y)


def natural_residual(problem, z, tau):
    """||z - proj(z - tau F(z))|| / tau; zero exactly at solutions."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    z = np.asarray(z, dtype=np.float64)
    step = problem.set.project(z - tau * problem.operator(z))
    return float(np.linalg.norm(z - step) / tau)


def dist_theta(known, z, w, theta):
    """min over stored solutions of theta ||z - s||^2 + (1 - theta) ||w - s||^2.

    Over a segment the objective is a convex 1-D quadratic in the segment
    parameter, so the minimizer is the clamped projection of the blend
    theta z + (1 - theta) w; over a point it is evaluated directly.
    """
    if known is None:
        raise ValueError("no known solution set")
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    z = np.asarray(z, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    s = known.project(theta * z + (1.0 - theta) * w)
    return float(theta * np.sum((z - s) ** 2) + (1.0 - theta) * np.sum((w - s) ** 2))


def ws_ratio(problem, known, x):
    """<F(s), x - s> / ||x - s|| with s the closest known solution to x.

    Sampling the infimum of this ratio over the feasible set estimates the
    sharpness modulus; x on the solution set is rejected (zero denominator).
    """
    if known is None:
        raise ValueError("no known solution set")
    x = np.asarray(x, dtype=np.float64)
    s = known.project(x)
    gap_dir = x - s
    dist = float(np.linalg.norm(gap_dir))
    if dist <= 1e-14:
        raise ValueError("point lies on the solution set")
    return float(problem.operator(s) @ gap_dir / dist)


_GAP_COLUMNS = ("gap_last", "gap_uniform", "gap_linear", "gap_quadratic")


@dataclass
class GapTrace:
    """Per-checkpoint convergence record of one run.

    evals is the cumulative sampled-evaluation charge (strictly increasing);
    the gap columns cover the last iterate and the uniform/linear/quadratic
    averages; dist_theta is present only when the instance has a known
    solution set. Tiny negative gaps (roundoff above -1e-10) are clipped to
    zero; anything more negative is a bug and rejected.
    """

    evals: np.ndarray
    gap_last: np.ndarray
    gap_uniform: np.ndarray
    gap_linear: np.ndarray
    gap_quadratic: np.ndarray
    dist_theta: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.evals = np.asarray(self.evals, dtype=np.int64)
        if self.evals.size and np.any(np.diff(self.evals) <= 0):
            raise ValueError("cumulative charges must be strictly increasing")
        for name in _GAP_COLUMNS:
            col = np.asarray(getattr(self, name), dtype=np.float64)
            if col.shape != self.evals.shape:
                raise ValueError(f"column {name} does not align with evals")
            if np.any(col < -_GAP_CLIP):
                raise ValueError(f"negative {name} beyond roundoff: {col.min():.3e}")
            setattr(self, name, np.maximum(col, 0.0))
        if self.dist_theta is not None:
            self.dist_theta = np.asarray(self.dist_theta, dtype=np.float64)
            if self.dist_theta.shape != self.evals.shape:
                raise ValueError("dist_theta does not align with evals")

    def __len__(self):
        return self.evals.size

    @property
    def columns(self):
        cols = ["evals", *_GAP_COLUMNS]
        if self.dist_theta is not None:
            cols.append("dist_theta")
        return cols

    def column(self, name):
        return getattr(self, name)

    def gap_at(self, budget, column="gap_last"):
        """Value of a column at the first checkpoint with evals >= budget."""
        idx = int(np.searchsorted(self.evals, budget, side="left"))
        if idx >= len(self):
            idx = len(self) - 1
        return float(self.column(column)[idx])

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write(",".join(self.columns) + "\n")
            for k in range(len(self)):
                cells = [str(int(self.evals[k]))]
                for name in self.columns[1:]:
                    cells.append(f"{self.column(name)[k]:.17g}")
                f.write(",".join(cells) + "\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as f:
            header = f.readline().strip().split(",")
            rows = [line.split(",") for line in f.read().splitlines() if line]
        data = {name: np.array([r[k] for r in rows], dtype=np.float64)
                for k, name in enumerate(header)}
        return cls(
            evals=data["evals"].astype(np.int64),
            gap_last=data["gap_last"],
            gap_uniform=data["gap_uniform"],
            gap_linear=data["gap_linear"],
            gap_quadratic=data["gap_quadratic"],
            dist_theta=data.get("dist_theta"),
        )
