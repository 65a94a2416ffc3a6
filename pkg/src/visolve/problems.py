"""Affine variational inequalities, bilinear saddle-point games, generators.

A problem is the operator F(z) = Mz + q over a feasible set. Bilinear
min-max games min_x max_y x'Ay + <bx,x> + <by,y> are the special case
M = [[0, A], [-A', 0]], stored through :class:`BilinearStructure` so F can be
evaluated without materializing M.
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp

from . import sets
from .rng import StableRng

log = logging.getLogger(__name__)

_EIG_CHECK_MAX_DIM = 64
_EIG_FLOOR = -1e-10


class BilinearStructure:
    """Payoff matrix plus linear terms of a bilinear saddle-point problem."""

    def __init__(self, A, bx=None, by=None):
        if sp.issparse(A):
            self.A = A.tocsr()
            self._A_csc = A.tocsc()
        else:
            self.A = np.asarray(A, dtype=np.float64)
            self._A_csc = None
        n, m = self.A.shape
        self.primal_dim = n
        self.dual_dim = m
        self.bx = np.zeros(n) if bx is None else np.asarray(bx, dtype=np.float64)
        self.by = np.zeros(m) if by is None else np.asarray(by, dtype=np.float64)
        if self.bx.shape != (n,) or self.by.shape != (m,):
            raise ValueError("linear terms must match the payoff dimensions")

    def row(self, i):
        if self._A_csc is not None:
            return self.A[i].toarray().ravel()
        return self.A[i]

    def col(self, j):
        if self._A_csc is not None:
            return self._A_csc[:, j].toarray().ravel()
        return self.A[:, j]

    def frobenius_norm(self):
        if sp.issparse(self.A):
            return float(np.sqrt(self.A.multiply(self.A).sum()))
        return float(np.linalg.norm(self.A))

    def dense_A(self):
        return self.A.toarray() if sp.issparse(self.A) else self.A


class AffineVI:
    """Monotone affine VI: find z* feasible with <F(z*), z - z*> >= 0 for all z.

    Monotonicity (M + M' positive semidefinite) is verified at construction
    for dimension <= 64; above that the eigenvalue check is skipped with a
    logged warning. Bilinear instances are skew-symmetric by construction and
    need no check.
    """

    def __init__(self, M, q, feasible_set, structure=None):
        self.set = feasible_set
        self.structure = structure
        self.q = np.asarray(q, dtype=np.float64)
        self._M = M if M is None else np.asarray(M, dtype=np.float64)
        d = feasible_set.dim
        if self.q.shape != (d,):
            raise ValueError("q must match the feasible-set dimension")
        if self._M is not None:
            if self._M.shape != (d, d):
                raise ValueError("M must be square of the set dimension")
            if d <= _EIG_CHECK_MAX_DIM:
                floor = float(np.linalg.eigvalsh(self._M + self._M.T).min())
                if floor < _EIG_FLOOR:
                    raise ValueError(f"operator is not monotone (eigenvalue floor {floor:.3e})")
            else:
                log.warning("monotonicity eigencheck skipped for dimension %d > %d",
                            d, _EIG_CHECK_MAX_DIM)
        elif structure is None:
            raise ValueError("need M, a bilinear structure, or both")

    @classmethod
    def bilinear(cls, A, bx=None, by=None, primal_set=None, dual_set=None):
        """Game min_x max_y x'Ay + <bx,x> + <by,y>; simplex strategy sets by default."""
        structure = BilinearStructure(A, bx, by)
        n, m = structure.primal_dim, structure.dual_dim
        primal_set = sets.Simplex(n) if primal_set is None else primal_set
        dual_set = sets.Simplex(m) if dual_set is None else dual_set
        if primal_set.dim != n or dual_set.dim != m:
            raise ValueError("strategy sets must match the payoff dimensions")
        feasible = sets.Product([primal_set, dual_set])
        q = np.concatenate([structure.bx, structure.by])
        return cls(None, q, feasible, structure=structure)

    @property
    def dim(self):
        return self.set.dim

    @property
    def M(self):
        """Dense operator matrix; materialized on demand for bilinear instances."""
        if self._M is None:
            A = self.structure.dense_A()
            n, m = A.shape
            M = np.zeros((n + m, n + m))
            M[:n, n:] = A
            M[n:, :n] = -A.T
            self._M = M
        return self._M

    def split(self, z):
        """(x, y) blocks of a stacked bilinear iterate."""
        n = self.structure.primal_dim
        return z[:n], z[n:]

    def operator(self, z):
        """F(z) = Mz + q, using the bilinear factorization when present."""
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: expected ({self.dim},), got {z.shape}")
        if self.structure is not None:
            s = self.structure
            x, y = self.split(z)
            return np.concatenate([s.A @ y + s.bx, -(s.A.T @ x) + s.by])
        return self._M @ z + self.q

    def operator_many(self, Z):
        """Row-wise operator values for a (k, dim) batch of points."""
        Z = np.asarray(Z, dtype=np.float64)
        if self.structure is not None:
            s = self.structure
            n = s.primal_dim
            X, Y = Z[:, :n], Z[:, n:]
            return np.hstack([Y @ s.A.T + s.bx, -(X @ s.A) + s.by])
        return Z @ self._M.T + self.q

    def lipschitz_bound(self):
        """Mean-square Lipschitz constant of the sampled oracle: ||A||_F for
        games, spectral norm of M otherwise."""
        if self.structure is not None:
            return self.structure.frobenius_norm()
        return spectral_norm(self._M)

    def spectral_norm(self):
        if self.structure is not None:
            return spectral_norm(self.structure.A)
        return spectral_norm(self._M)


def spectral_norm(A, rel_tol=1e-8, max_iters=10_000):
    """Largest singular value by power iteration on A'A, seeded start vector."""
    rng = StableRng(0)
    v = rng.uniform(A.shape[1]) - 0.5
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iters):
        u = A @ v
        v = A.T @ u
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
        new_sigma = float(np.sqrt(nv))
        if abs(new_sigma - sigma) <= rel_tol * max(new_sigma, 1e-300):
            return new_sigma
        sigma = new_sigma
    return sigma


class SolutionSet:
    """Known solution set of a VI: a single point or a segment.

    Construction verifies the VI inequality <F(p), z - p> >= -tol at the
    stored reference points against 10^4 sampled feasible directions.
    """

    def __init__(self, kind, points, problem=None, n_checks=10_000, tol=1e-9, check_seed=0):
        self.kind = kind
        self.points = [np.asarray(p, dtype=np.float64) for p in points]
        if problem is not None:
            self._validate(problem, n_checks, tol, check_seed)

    @classmethod
    def single(cls, z_star, problem=None, **kw):
        return cls("point", [z_star], problem, **kw)

    @classmethod
    def segment(cls, p0, p1, problem=None, **kw):
        return cls("segment", [p0, p1], problem, **kw)

    def _validate(self, problem, n_checks, tol, seed):
        Z = problem.set.sample(StableRng(seed), n_checks)
        if self.kind == "point":
            refs = [self.points[0]]
        else:
            p0, p1 = self.points
            refs = [p0, 0.5 * (p0 + p1), p1]
        for p in refs:
            worst = float(np.min((Z - p) @ problem.operator(p)))
            if worst < -tol:
                raise ValueError(f"point {p} violates the VI inequality by {-worst:.3e}")

    def project(self, z):
        """Closest stored solution in Euclidean norm."""
        z = np.asarray(z, dtype=np.float64)
        if self.kind == "point":
            return self.points[0].copy()
        p0, p1 = self.points
        d = p1 - p0
        t = float(np.clip((z - p0) @ d / (d @ d), 0.0, 1.0))
        return p0 + t * d

    def distance(self, z):
        return float(np.linalg.norm(np.asarray(z) - self.project(z)))


# ---------------------------------------------------------------------------
# instance generators
# ---------------------------------------------------------------------------

def policeman_burglar(n, seed):
    """Pursuit game on a street of n houses.

    House wealths are folded standard normals; the catch probability decays
    exponentially in the distance between houses: A[i, j] = w_i * (1 -
    exp(-0.8 * |i - j|)).
    """
    n = int(n)
    if n < 1:
        raise ValueError("need at least one house")
    w = np.abs(StableRng(seed).normal(n))
    dist = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    A = w[:, None] * (1.0 - np.exp(-0.8 * dist))
    return AffineVI.bilinear(A)


def nemirovski(n, family, alpha_exp):
    """Symmetric test matrices A[i,j] = ((i+j-1)/(2n-1))^a (family 1) or
    ((|i-j|+1)/(2n-1))^a (family 2), with 1-based indices."""
    n = int(n)
    if n < 1:
        raise ValueError("matrix dimension must be positive")
    idx = np.arange(1, n + 1, dtype=np.float64)
    if family == 1:
        base = (idx[:, None] + idx[None, :] - 1.0) / (2.0 * n - 1.0)
    elif family == 2:
        base = (np.abs(idx[:, None] - idx[None, :]) + 1.0) / (2.0 * n - 1.0)
    else:
        raise ValueError(f"unknown family {family!r}, expected 1 or 2")
    return AffineVI.bilinear(base ** alpha_exp)


def uniform_random(n, m, seed):
    """Payoff entries drawn i.i.d. uniform on the integers {0, ..., 10}."""
    n, m = int(n), int(m)
    if n < 1 or m < 1:
        raise ValueError("payoff dimensions must be positive")
    A = StableRng(seed).integers(0, 10, n * m).astype(np.float64).reshape(n, m)
    return AffineVI.bilinear(A)


def matching_pennies():
    """The 2x2 symmetric game with unique uniform equilibrium."""
    A = np.array([[1.0, -1.0], [-1.0, 1.0]])
    problem = AffineVI.bilinear(A)
    known = SolutionSet.single(np.full(4, 0.5), problem)
    return problem, known


def ws_example():
    """2-D VI over {0 <= x <= 1, x1 + x2 <= 3/2} with operator
    F(x) = ((x1+x2)/2 - 2, (x1+x2)/2 - 2).

    The solution set is the segment from (1/2, 1) to (1, 1/2); the sharpness
    ratio <F(x*), x - proj(x)> / ||x - proj(x)|| is bounded away from zero on
    the whole polytope.
    """
    M = np.full((2, 2), 0.5)
    q = np.array([-2.0, -2.0])
    feasible = sets.HalfspaceBox(0.0, 1.0, np.array([1.0, 1.0]), 1.5)
    problem = AffineVI(M, q, feasible)
    known = SolutionSet.segment(np.array([0.5, 1.0]), np.array([1.0, 0.5]), problem)
    return problem, known


def grid_gradient(grid):
    """Forward-difference operator on a grid x grid image, one x- and one
    y-difference row per pixel (2*grid^2 rows); boundary rows are zero."""
    g = int(grid)
    n = g * g
    rows, cols, vals = [], [], []
    def pix(i, j):
        return i * g + j
    for i in range(g):
        for j in range(g):
            r = 2 * pix(i, j)
            if i + 1 < g:
                rows += [r, r]
                cols += [pix(i + 1, j), pix(i, j)]
                vals += [1.0, -1.0]
            if j + 1 < g:
                rows += [r + 1, r + 1]
                cols += [pix(i, j + 1), pix(i, j)]
                vals += [1.0, -1.0]
    return sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, n))


def synthetic_segmentation(grid, regions, seed):
    """Min-cut style labeling game on a grid x grid image with the given
    number of regions.

    Each pixel picks a label distribution (pixel-major simplex blocks); the
    adversary plays a bounded dual field per difference row (box of radius
    1/2, label-major). The coupling applies the per-label discrete gradient;
    the primal linear term is a seeded nonnegative data cost.
    """
    g, h = int(grid), int(regions)
    if g < 2:
        raise ValueError("grid must be at least 2x2")
    if h < 2:
        raise ValueError("need at least two regions")
    n_pix = g * g
    G = grid_gradient(g)                            # (2*n_pix, n_pix)
    A_label_major = sp.block_diag([G.T] * h, format="csr")
    # primal rows are (pixel, label); block-diagonal rows are (label, pixel)
    to_label_major = (np.arange(h)[None, :] * n_pix + np.arange(n_pix)[:, None]).ravel()
    A = A_label_major[to_label_major, :]
    d = StableRng(seed).uniform(n_pix * h)
    primal = sets.SimplexProduct([h] * n_pix)
    dual = sets.Box(-0.5, 0.5, dim=2 * n_pix * h)
    return AffineVI.bilinear(A, bx=d, by=None, primal_set=primal, dual_set=dual)


# ---------------------------------------------------------------------------
# instance files
# ---------------------------------------------------------------------------

def _write_values(f, values, per_line=8):
    values = np.asarray(values, dtype=np.float64).ravel()
    for start in range(0, values.size, per_line):
        f.write(" ".join(f"{v:.17g}" for v in values[start:start + per_line]) + "\n")


def save_instance(path, problem):
    """Write the text instance format: a `vif1 <n> <m> <set-descriptor>`
    header, then the coupling matrix row-major, then the linear terms.

    Bilinear instances store A, bx, by; plain affine instances store M and q
    (and nothing after). Values carry 17 significant digits so loading
    reproduces the instance exactly.
    """
    with open(path, "w") as f:
        if problem.structure is not None:
            s = problem.structure
            f.write(f"vif1 {s.primal_dim} {s.dual_dim} {problem.set.descriptor()}\n")
            _write_values(f, s.dense_A())
            _write_values(f, s.bx)
            _write_values(f, s.by)
        else:
            d = problem.dim
            f.write(f"vif1 {d} {d} {problem.set.descriptor()}\n")
            _write_values(f, problem.M)
            _write_values(f, problem.q)


def load_instance(path):
    """Read an instance file written by :func:`save_instance`.

    The two layouts are told apart by the value count: n*m + n + m for a
    bilinear instance versus d*d + d for a plain affine one.
    """
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 4 or header[0] != "vif1":
            raise ValueError("malformed header; expected 'vif1 <n> <m> <set-descriptor>'")
        n, m, descriptor = int(header[1]), int(header[2]), header[3]
        values = np.array(f.read().split(), dtype=np.float64)
    feasible = sets.from_descriptor(descriptor)
    if values.size == n * m + n + m:
        A = values[:n * m].reshape(n, m)
        bx = values[n * m:n * m + n]
        by = values[n * m + n:]
        if not isinstance(feasible, sets.Product) or len(feasible.parts) != 2:
            raise ValueError("bilinear layout needs a primal*dual set descriptor")
        return AffineVI.bilinear(A, bx, by, primal_set=feasible.parts[0],
                                 dual_set=feasible.parts[1])
    if n == m and values.size == n * n + n:
        M = values[:n * n].reshape(n, n)
        return AffineVI(M, values[n * n:], feasible)
    raise ValueError(f"value count {values.size} matches neither layout for n={n}, m={m}")
