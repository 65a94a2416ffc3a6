import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from visolve.rng import StableRng
from visolve.sets import (Box, HalfspaceBox, Product, Simplex, SimplexProduct,
                          from_descriptor, simplex_project)


def simplex_projection_oracle(v):
    """Exhaustive KKT enumeration over support sets (small dimensions only)."""
    d = v.size
    best, best_dist = None, np.inf
    for r in range(1, d + 1):
        for support in itertools.combinations(range(d), r):
            s = list(support)
            theta = (v[s].sum() - 1.0) / r
            x = np.zeros(d)
            x[s] = v[s] - theta
            if np.all(x[s] >= -1e-12) and np.all(v[x == 0.0] <= theta + 1e-12):
                dist = np.sum((x - v) ** 2)
                if dist < best_dist:
                    best, best_dist = x, dist
    return best


def variants():
    return [
        Simplex(5),
        Box(np.array([-1.0, 0.0, -2.0, 1.0]), np.array([1.0, 0.5, -1.0, 3.0])),
        SimplexProduct([3, 2, 4]),
        HalfspaceBox(0.0, 1.0, np.array([1.0, 1.0]), 1.5),
        Product([Simplex(3), Box(-0.5, 0.5, dim=2)]),
    ]


def test_simplex_feasible_point_unchanged():
    s = Simplex(2)
    v = np.array([0.5, 0.5])
    assert np.array_equal(s.project(v), v)


def test_simplex_corner_example():
    s = Simplex(2)
    assert np.allclose(s.project(np.array([2.0, 0.0])), [1.0, 0.0], atol=1e-15)


def test_simplex_matches_kkt_oracle():
    rng = StableRng(11)
    for d in (2, 3):
        for _ in range(200):
            v = 4.0 * rng.uniform(d) - 2.0
            assert np.allclose(simplex_project(v), simplex_projection_oracle(v), atol=1e-12)


def test_halfspacebox_example_point():
    s = HalfspaceBox(0.0, 1.0, np.array([1.0, 1.0]), 1.5)
    assert np.allclose(s.project(np.array([1.0, 1.0])), [0.75, 0.75], atol=1e-12)


def test_halfspacebox_beats_grid_search():
    s = HalfspaceBox(0.0, 1.0, np.array([1.0, 1.0]), 1.5)
    axis = np.linspace(0.0, 1.0, 401)
    gx, gy = np.meshgrid(axis, axis)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    pts = pts[pts @ s.a <= s.b]
    rng = StableRng(3)
    for _ in range(50):
        v = 4.0 * rng.uniform(2) - 1.5
        proj = s.project(v)
        grid_best = np.min(np.sum((pts - v) ** 2, axis=1))
        assert np.sum((proj - v) ** 2) <= grid_best + 1e-9
        assert s.contains(proj, tol=1e-12)


def test_box_clamp_example():
    s = Box(-0.5, 0.5, dim=2)
    assert np.array_equal(s.project(np.array([3.0, -0.2])), [0.5, -0.2])


@pytest.mark.parametrize("feasible", variants(), ids=lambda s: type(s).__name__)
def test_projection_idempotent(feasible):
    rng = StableRng(7)
    for _ in range(1000):
        v = 6.0 * rng.uniform(feasible.dim) - 3.0
        once = feasible.project(v)
        twice = feasible.project(once)
        assert np.linalg.norm(twice - once) <= 1e-12
        assert feasible.contains(once, tol=1e-12)


@pytest.mark.parametrize("feasible", variants(), ids=lambda s: type(s).__name__)
def test_projection_nonexpansive(feasible):
    rng = StableRng(13)
    for _ in range(1000):
        u = 6.0 * rng.uniform(feasible.dim) - 3.0
        v = 6.0 * rng.uniform(feasible.dim) - 3.0
        lhs = np.linalg.norm(feasible.project(u) - feasible.project(v))
        assert lhs <= np.linalg.norm(u - v) * (1.0 + 1e-12) + 1e-15


@pytest.mark.parametrize("feasible", variants(), ids=lambda s: type(s).__name__)
def test_projection_variational_inequality(feasible):
    """<v - Pv, w - Pv> <= tol for every feasible w characterizes the
    Euclidean projection onto a convex set."""
    rng = StableRng(29)
    W = feasible.sample(rng, 100)
    for _ in range(100):
        v = 6.0 * rng.uniform(feasible.dim) - 3.0
        proj = feasible.project(v)
        inner = (W - proj) @ (v - proj)
        assert np.all(inner <= 1e-9 * max(1.0, np.linalg.norm(v)))


@pytest.mark.parametrize("feasible", variants(), ids=lambda s: type(s).__name__)
def test_sample_and_center_feasible(feasible):
    pts = feasible.sample(StableRng(5), 200)
    assert pts.shape == (200, feasible.dim)
    for p in pts:
        assert feasible.contains(p, tol=1e-9)
    assert feasible.contains(feasible.center(), tol=1e-12)


def support_max_bruteforce(feasible, c):
    if isinstance(feasible, Simplex):
        return float(np.max(c))
    if isinstance(feasible, Box):
        corners = itertools.product(*zip(feasible.lo, feasible.hi))
        return max(float(np.dot(c, np.array(k))) for k in corners)
    raise NotImplementedError


def test_support_max_simplex_and_box():
    rng = StableRng(2)
    simplex, box = Simplex(4), Box(np.array([-1.0, 0.5]), np.array([2.0, 0.75]))
    for _ in range(100):
        c = rng.uniform(4) - 0.5
        assert np.isclose(simplex.support_max(c), support_max_bruteforce(simplex, c))
        c2 = rng.uniform(2) - 0.5
        assert np.isclose(box.support_max(c2), support_max_bruteforce(box, c2))
    prod = SimplexProduct([2, 3])
    c = rng.uniform(5) - 0.5
    assert np.isclose(prod.support_max(c), np.max(c[:2]) + np.max(c[2:]))


@pytest.mark.parametrize("feasible", variants(), ids=lambda s: type(s).__name__)
def test_descriptor_roundtrip(feasible):
    assert from_descriptor(feasible.descriptor()) == feasible


def test_descriptor_vector_box():
    box = Box(np.array([-1.0, 0.0]), np.array([0.5, 2.0]))
    assert from_descriptor(box.descriptor()) == box


def test_project_rejects_bad_input():
    s = Simplex(3)
    with pytest.raises(ValueError, match="dimension"):
        s.project(np.zeros(4))
    with pytest.raises(ValueError, match="finite"):
        s.project(np.array([1.0, np.nan, 0.0]))


def test_empty_halfspacebox_rejected():
    with pytest.raises(ValueError, match="empty|intersect"):
        HalfspaceBox(0.0, 1.0, np.array([1.0, 1.0]), -1.0)


def test_box_rejects_inverted_bounds():
    with pytest.raises(ValueError, match="lo <= hi"):
        Box(np.array([1.0]), np.array([0.0]))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=-50, max_value=50), min_size=1, max_size=8))
def test_simplex_projection_properties(values):
    v = np.array(values)
    out = simplex_project(v)
    assert np.all(out >= 0.0)
    assert abs(out.sum() - 1.0) <= 1e-9
    assert np.linalg.norm(simplex_project(out) - out) <= 1e-12
