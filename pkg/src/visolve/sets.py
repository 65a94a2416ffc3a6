"""Projectable feasible sets with exact Euclidean projections.

Variants: probability simplex, box, product of simplexes, a 2-D
box-with-halfspace polytope, and concatenated products of the above. All sets
are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import numpy as np

from .rng import StableRng

_FEAS_TOL = 1e-12


def _check_vector(set_dim, v):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (set_dim,):
        raise ValueError(f"dimension mismatch: expected ({set_dim},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite input vector")
    return v


def simplex_project(v):
    """Euclidean projection onto the unit simplex, O(d log d) sort-threshold.

    Threshold ties resolve through the cumulative rule: the kept support is
    the longest prefix of the descending sort with positive shifted mass.
    """
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    mask = u - css / ks > 0
    rho = np.nonzero(mask)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def batch_simplex_project(rows):
    """Row-wise simplex projection of a (k, h) matrix."""
    h = rows.shape[1]
    u = -np.sort(-rows, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ks = np.arange(1, h + 1)
    mask = u - css / ks > 0
    rho = h - 1 - np.argmax(mask[:, ::-1], axis=1)
    theta = css[np.arange(rows.shape[0]), rho] / (rho + 1.0)
    return np.maximum(rows - theta[:, None], 0.0)


class FeasibleSet:
    """Base class; concrete sets implement projection, sampling, support."""

    dim: int

    def project(self, v):
        v = _check_vector(self.dim, v)
        return self._project(v)

    def contains(self, v, tol=1e-9):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            return False
        return self._contains(v, tol)

    def sample(self, rng: StableRng, n):
        """n points drawn from the set (uniform, or near-uniform for products)."""
        raise NotImplementedError

    def center(self):
        raise NotImplementedError

    def support_max(self, c):
        """max over the set of <c, x>, in closed form where available."""
        raise NotImplementedError(f"no closed-form support function for {type(self).__name__}")

    def descriptor(self):
        """Token used in the instance file header; parse with from_descriptor."""
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.descriptor() == other.descriptor()

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()})"


class Simplex(FeasibleSet):
    """Probability simplex {x >= 0, sum x = 1} in the given dimension."""

    def __init__(self, dim):
        dim = int(dim)
        if dim < 1:
            raise ValueError("simplex dimension must be positive")
        self.dim = dim

    def _project(self, v):
        return simplex_project(v)

    def _contains(self, v, tol):
        return bool(np.all(v >= -tol) and abs(v.sum() - 1.0) <= tol)

    def sample(self, rng, n):
        e = -np.log1p(-rng.uniform(n * self.dim)).reshape(n, self.dim)
        return e / e.sum(axis=1, keepdims=True)

    def center(self):
        return np.full(self.dim, 1.0 / self.dim)

    def support_max(self, c):
        return float(np.max(c))

    def descriptor(self):
        return f"simplex:{self.dim}"


class Box(FeasibleSet):
    """Axis-aligned box {lo <= x <= hi}; scalar bounds broadcast."""

    def __init__(self, lo, hi, dim=None):
        if np.isscalar(lo) and np.isscalar(hi):
            if dim is None:
                raise ValueError("scalar bounds need an explicit dimension")
            lo = np.full(int(dim), float(lo))
            hi = np.full(int(dim), float(hi))
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("bounds must be 1-D vectors of equal length")
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi componentwise")
        self.lo, self.hi = lo, hi
        self.dim = lo.size

    def _project(self, v):
        return np.clip(v, self.lo, self.hi)

    def _contains(self, v, tol):
        return bool(np.all(v >= self.lo - tol) and np.all(v <= self.hi + tol))

    def sample(self, rng, n):
        u = rng.uniform(n * self.dim).reshape(n, self.dim)
        return self.lo + u * (self.hi - self.lo)

    def center(self):
        return 0.5 * (self.lo + self.hi)

    def support_max(self, c):
        return float(np.sum(np.maximum(self.lo * c, self.hi * c)))

    def descriptor(self):
        if np.all(self.lo == self.lo[0]) and np.all(self.hi == self.hi[0]):
            return f"box:{self.dim}:{self.lo[0]:.17g}:{self.hi[0]:.17g}"
        los = ",".join(f"{x:.17g}" for x in self.lo)
        his = ",".join(f"{x:.17g}" for x in self.hi)
        return f"boxv:{los}:{his}"


class SimplexProduct(FeasibleSet):
    """Concatenation of probability simplexes with the given block sizes."""

    def __init__(self, block_dims):
        dims = [int(d) for d in block_dims]
        if not dims or any(d < 1 for d in dims):
            raise ValueError("block dimensions must be positive")
        self.block_dims = tuple(dims)
        self.dim = sum(dims)
        self._offsets = np.concatenate([[0], np.cumsum(dims)])
        self._uniform = len(set(dims)) == 1

    def _blocks(self, v):
        return [v[self._offsets[i]:self._offsets[i + 1]] for i in range(len(self.block_dims))]

    def _project(self, v):
        if self._uniform:
            return batch_simplex_project(v.reshape(-1, self.block_dims[0])).ravel()
        return np.concatenate([simplex_project(b) for b in self._blocks(v)])

    def _contains(self, v, tol):
        if np.any(v < -tol):
            return False
        sums = np.add.reduceat(v, self._offsets[:-1])
        return bool(np.all(np.abs(sums - 1.0) <= tol))

    def sample(self, rng, n):
        e = -np.log1p(-rng.uniform(n * self.dim)).reshape(n, self.dim)
        for i in range(len(self.block_dims)):
            sl = slice(self._offsets[i], self._offsets[i + 1])
            e[:, sl] /= e[:, sl].sum(axis=1, keepdims=True)
        return e

    def center(self):
        return np.concatenate([np.full(d, 1.0 / d) for d in self.block_dims])

    def support_max(self, c):
        return float(sum(np.max(b) for b in self._blocks(np.asarray(c))))

    def descriptor(self):
        if self._uniform:
            return f"simplexprod:{self.block_dims[0]}x{len(self.block_dims)}"
        return "simplexprod:" + ",".join(str(d) for d in self.block_dims)


class HalfspaceBox(FeasibleSet):
    """2-D polytope {lo <= x <= hi, <a, x> <= b}.

    Projection enumerates every KKT active-set configuration (the point
    itself, each single facet, and each facet pair), keeps the feasible
    candidates, and returns the closest; this is exact in 2-D. Emptiness is
    caught at construction by projecting the box midpoint.
    """

    def __init__(self, lo, hi, a, b):
        if np.isscalar(lo):
            lo = np.full(2, float(lo))
        if np.isscalar(hi):
            hi = np.full(2, float(hi))
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        self.a = np.asarray(a, dtype=np.float64)
        self.b = float(b)
        if self.lo.shape != (2,) or self.hi.shape != (2,) or self.a.shape != (2,):
            raise ValueError("this polytope variant is 2-D only")
        if np.any(self.lo > self.hi):
            raise ValueError("box requires lo <= hi componentwise")
        if np.allclose(self.a, 0.0):
            raise ValueError("halfspace normal must be nonzero")
        self.dim = 2
        self.project(0.5 * (self.lo + self.hi))  # raises when the set is empty

    def _candidates(self, v):
        lo, hi, a, b = self.lo, self.hi, self.a, self.b
        cands = [v]
        # single active facet: one box face, or the halfspace boundary
        for i in range(2):
            for bound in (lo[i], hi[i]):
                c = v.copy()
                c[i] = bound
                cands.append(c)
        cands.append(v - ((a @ v - b) / (a @ a)) * a)
        # facet pairs: box corners, and halfspace boundary crossed with a face
        for x0 in (lo[0], hi[0]):
            for x1 in (lo[1], hi[1]):
                cands.append(np.array([x0, x1]))
        for i in range(2):
            j = 1 - i
            if a[j] != 0.0:
                for bound in (lo[i], hi[i]):
                    c = np.empty(2)
                    c[i] = bound
                    c[j] = (b - a[i] * bound) / a[j]
                    cands.append(c)
        return cands

    def _project(self, v):
        best, best_d = None, np.inf
        for c in self._candidates(v):
            if self._contains(c, _FEAS_TOL * max(1.0, float(np.abs(c).max()))):
                d = float(np.sum((c - v) ** 2))
                if d < best_d:
                    best, best_d = c, d
        if best is None:
            raise ValueError("empty feasible set: box and halfspace do not intersect")
        return np.clip(best, self.lo, self.hi)

    def _contains(self, v, tol):
        return bool(
            np.all(v >= self.lo - tol)
            and np.all(v <= self.hi + tol)
            and self.a @ v <= self.b + tol
        )

    def sample(self, rng, n):
        out = np.empty((n, 2))
        filled = 0
        while filled < n:
            batch = max(2 * (n - filled), 16)
            u = rng.uniform(2 * batch).reshape(batch, 2)
            pts = self.lo + u * (self.hi - self.lo)
            ok = pts @ self.a <= self.b
            take = min(int(ok.sum()), n - filled)
            out[filled:filled + take] = pts[ok][:take]
            filled += take
        return out

    def center(self):
        return self.project(0.5 * (self.lo + self.hi))

    def descriptor(self):
        lo, hi, a0, a1, b = (
            f"{self.lo[0]:.17g},{self.lo[1]:.17g}",
            f"{self.hi[0]:.17g},{self.hi[1]:.17g}",
            f"{self.a[0]:.17g}",
            f"{self.a[1]:.17g}",
            f"{self.b:.17g}",
        )
        return f"halfspacebox:{lo}:{hi}:{a0},{a1}:{b}"


class Product(FeasibleSet):
    """Concatenation of feasible sets along the coordinate axis."""

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise ValueError("empty product")
        self.parts = parts
        self.dim = sum(p.dim for p in parts)
        self._offsets = np.concatenate([[0], np.cumsum([p.dim for p in parts])])
        self._equal_simplexes = (all(isinstance(p, Simplex) for p in parts)
                                 and len({p.dim for p in parts}) == 1)

    def split(self, v):
        return [v[self._offsets[i]:self._offsets[i + 1]] for i in range(len(self.parts))]

    def _project(self, v):
        if self._equal_simplexes:
            return batch_simplex_project(v.reshape(len(self.parts), -1)).ravel()
        return np.concatenate([p.project(b) for p, b in zip(self.parts, self.split(v))])

    def _contains(self, v, tol):
        return all(p._contains(b, tol) for p, b in zip(self.parts, self.split(v)))

    def sample(self, rng, n):
        return np.hstack([p.sample(rng, n) for p in self.parts])

    def center(self):
        return np.concatenate([p.center() for p in self.parts])

    def support_max(self, c):
        return float(sum(p.support_max(b) for p, b in zip(self.parts, self.split(np.asarray(c)))))

    def descriptor(self):
        return "*".join(p.descriptor() for p in self.parts)


def _parse_floats(token):
    return np.array([float(t) for t in token.split(",")])


def from_descriptor(token):
    """Inverse of FeasibleSet.descriptor (products use '*' at the top level)."""
    if "*" in token:
        return Product([from_descriptor(t) for t in token.split("*")])
    kind, _, rest = token.partition(":")
    if kind == "simplex":
        return Simplex(int(rest))
    if kind == "box":
        d, lo, hi = rest.split(":")
        return Box(float(lo), float(hi), dim=int(d))
    if kind == "boxv":
        lo, hi = rest.split(":")
        return Box(_parse_floats(lo), _parse_floats(hi))
    if kind == "simplexprod":
        if "x" in rest:
            blk, count = rest.split("x")
            return SimplexProduct([int(blk)] * int(count))
        return SimplexProduct([int(t) for t in rest.split(",")])
    if kind == "halfspacebox":
        lo, hi, a, b = rest.split(":")
        return HalfspaceBox(_parse_floats(lo), _parse_floats(hi), _parse_floats(a), float(b))
    raise ValueError(f"unknown set descriptor {token!r}")
