"""Polynomially weighted running averages of half-step iterates.

The k-th pushed iterate gets weight k^q (with 0^0 = 1, so q = 0 is the plain
uniform average including the first iterate, while q >= 1 gives zero weight
to the first push). An explicit weight can override the count-based one;
epoch-structured solvers use this to weight every inner iterate of epoch s
by s^q.
"""

from __future__ import annotations

import numpy as np


class AveragingAccumulator:
    """Running weighted sum with exponent q (0 uniform, 1 linear, 2 quadratic)."""

    def __init__(self, q):
        q = int(q)
        if q < 0:
            raise ValueError("weight exponent must be nonnegative")
        self.q = q
        self.weighted_sum = None
        self.total_weight = 0.0
        self.count = 0

    def push(self, z, weight=None):
        z = np.asarray(z, dtype=np.float64)
        if self.weighted_sum is None:
            self.weighted_sum = np.zeros_like(z)
        elif z.shape != self.weighted_sum.shape:
            raise ValueError("dimension mismatch with earlier pushes")
        w = float(self.count ** self.q) if weight is None else float(weight)
        self.weighted_sum += w * z
        self.total_weight += w
        self.count += 1

    @property
    def defined(self):
        return self.total_weight > 0.0

    def current(self):
        """Weighted average so far, or None while the total weight is zero
        (for q >= 1 the first push carries weight zero)."""
        if not self.defined:
            return None
        return self.weighted_sum / self.total_weight
