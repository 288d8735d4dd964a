"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library's own algebra: signature
coefficients come from nested Riemann-Stieltjes sums on a refined grid,
the Frechet reference from a direct recursive DP, derivatives from central
finite differences.  Library results are checked against these rather
than against themselves.
"""

from __future__ import annotations

import numpy as np
import pytest

from pathsig.paths import PiecewiseLinearPath, Reparametrization, from_points


def riemann_signature_coeff(path: PiecewiseLinearPath, word, steps: int = 4000,
                            t_hi: float = 1.0) -> float:
    """Iterated-integral coefficient by nested cumulative trapezoid sums.

    Independent of the tensor algebra: walks a fine uniform grid and
    updates one running integral per nesting level.  Second-order accurate
    in the step size for polygonal paths.
    """
    t = np.linspace(0.0, t_hi, steps + 1)
    pts = path.at(t)
    inner = np.ones(steps + 1)
    for letter in word:
        dx = np.diff(pts[:, letter - 1])
        mids = 0.5 * (inner[:-1] + inner[1:])
        inner = np.concatenate([[0.0], np.cumsum(mids * dx)])
    return float(inner[-1])


def riemann_extended_signature(path: PiecewiseLinearPath, forms,
                               steps: int = 20000, t_lo: float = 0.0,
                               t_hi: float = 1.0) -> float:
    """Iterated integral along one-forms by the same nested Riemann scheme."""
    t = np.linspace(t_lo, t_hi, steps + 1)
    pts = path.at(t)
    mids = path.at(0.5 * (t[:-1] + t[1:]))
    inner = np.ones(steps + 1)
    for form in forms:
        comp = form.components(mids)
        dflow = np.einsum("ni,ni->n", comp, np.diff(pts, axis=0))
        avg = 0.5 * (inner[:-1] + inner[1:])
        inner = np.concatenate([[0.0], np.cumsum(avg * dflow)])
    return float(inner[-1])


def brute_frechet(p: np.ndarray, q: np.ndarray) -> float:
    """Reference discrete Frechet distance via the textbook recursion."""
    n, m = len(p), len(q)
    dist = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=2)
    ca = np.full((n, m), -1.0)

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(10000 + n * m)

    def rec(i, j):
        if ca[i, j] >= 0:
            return ca[i, j]
        if i == 0 and j == 0:
            ca[i, j] = dist[0, 0]
        elif j == 0:
            ca[i, j] = max(rec(i - 1, 0), dist[i, j])
        elif i == 0:
            ca[i, j] = max(rec(0, j - 1), dist[i, j])
        else:
            ca[i, j] = max(min(rec(i - 1, j), rec(i, j - 1),
                               rec(i - 1, j - 1)), dist[i, j])
        return ca[i, j]

    try:
        return float(rec(n - 1, m - 1))
    finally:
        sys.setrecursionlimit(old)


def central_difference(f, x: np.ndarray, axis: int, h: float) -> float:
    e = np.zeros_like(x)
    e[axis] = h
    return float((f(x + e) - f(x - e)) / (2.0 * h))


def random_path(rng: np.random.Generator, dim: int, n_knots: int,
                box: float = 1.0) -> PiecewiseLinearPath:
    """Random polygonal path in the centered box of the given half-width."""
    pts = np.vstack([np.zeros(dim),
                     rng.uniform(-box, box, size=(n_knots - 1, dim))])
    times = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95,
                                                       n_knots - 2)), [1.0]])
    return PiecewiseLinearPath(times, pts)


def random_reparametrization(rng: np.random.Generator,
                             n_knots: int = 6) -> Reparametrization:
    u = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, n_knots)), [1.0]])
    v = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, n_knots)), [1.0]])
    return Reparametrization(u, v)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def l_path():
    """Unit L: right then up."""
    return from_points([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])


@pytest.fixture
def line_fixture():
    """The straight line x_t = (2t, 0) through three cubes at epsilon = 1."""
    return from_points([[0.0, 0.0], [2.0, 0.0]])
