"""Reparametrization-invariant distance between paths (Frechet variant).

The target quantity is inf over strictly increasing reparametrizations
sigma of sup_t |x_t - y_{sigma(t)}|.  That infimum is not computable in
closed form; the estimator here is the discrete Frechet distance on a
resolution x resolution coupling grid with monotone couplings and matched
endpoints.  Monotone staircase couplings approximate strictly increasing
maps arbitrarily well, so the discrete value converges to the continuous
infimum as the resolution grows; the bias is one-sided (discrete >=
continuous restricted to the sample set).

This d is only a pseudo-metric on paths in general: it cannot separate a
path from a slowed copy that then sits still.  Paths constant on some
subinterval form the degenerate set detected by :func:`is_degenerate`; off
that set d separates reparametrization classes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paths import PiecewiseLinearPath


@dataclass(frozen=True)
class FrechetConfig:
    resolution: int = 512

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")


def frechet_variant(x: PiecewiseLinearPath, y: PiecewiseLinearPath,
                    config: FrechetConfig = FrechetConfig()) -> float:
    """Discrete Frechet distance between uniform resamplings of x and y."""
    if x.dim != y.dim:
        raise ValueError("dimension mismatch")
    t = np.linspace(0.0, 1.0, config.resolution)
    return discrete_frechet(x.at(t), y.at(t))


def discrete_frechet(p: np.ndarray, q: np.ndarray) -> float:
    """Classic coupling DP, vectorized over anti-diagonals.

    ca[i, j] = max(D[i, j], min(ca[i-1, j], ca[i, j-1], ca[i-1, j-1])),
    swept along diagonals i + j = const so each sweep is elementwise.
    """
    n, m = p.shape[0], q.shape[0]
    dmat = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=2)
    prev2: np.ndarray | None = None
    prev1: np.ndarray | None = None
    for s in range(n + m - 1):
        i_lo = max(0, s - m + 1)
        i_hi = min(s, n - 1)
        i = np.arange(i_lo, i_hi + 1)
        d = dmat[i, s - i]
        if s == 0:
            cur = d
        else:
            best = np.full(i.size, np.inf)
            p_lo = max(0, s - m)  # first i on the previous diagonal
            # neighbour (i-1, j): previous diagonal at index i-1
            k = i - 1 - p_lo
            valid = i - 1 >= p_lo
            best[valid] = np.minimum(best[valid], prev1[k[valid]])
            # neighbour (i, j-1): previous diagonal at index i, needs j >= 1
            k = i - p_lo
            valid = (k < prev1.size) & (s - i >= 1)
            best[valid] = np.minimum(best[valid], prev1[k[valid]])
            if s >= 2 and prev2 is not None:
                pp_lo = max(0, s - 1 - m)
                k = i - 1 - pp_lo
                valid = (i - 1 >= pp_lo) & (k < prev2.size) & (s - i >= 1)
                best[valid] = np.minimum(best[valid], prev2[k[valid]])
            cur = np.maximum(d, best)
        prev2, prev1 = prev1, cur
    return float(prev1[-1])


def mesh_oscillation(path: PiecewiseLinearPath, resolution: int) -> float:
    """Max displacement between consecutive sample points at the given
    resolution; controls the discretization error of the estimator."""
    t = np.linspace(0.0, 1.0, resolution)
    pts = path.at(t)
    return float(np.max(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def is_degenerate(path: PiecewiseLinearPath, tolerance: float = 0.0) -> bool:
    """True iff some maximal run of knots with point-diameter <= tolerance
    spans positive time (the path effectively sits still there)."""
    pts = path.points
    n = pts.shape[0]
    i = 0
    while i < n - 1:
        # grow the run at i, tracking the diameter incrementally
        j = i + 1
        diam = 0.0
        while j < n:
            cand = max(diam, float(np.max(
                np.linalg.norm(pts[i:j] - pts[j], axis=1))))
            if cand > tolerance:
                break
            diam = cand
            j += 1
        if j - 1 > i:
            return True
        i += 1
    return False
