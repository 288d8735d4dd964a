"""Nested path-integral quadrature on piecewise-linear paths.

The integrals computed here all have the shape

    I_n(t) = integral over s1 < ... < sn < t of w1(s1) ds1 ... wn(sn) dsn,

evaluated level by level: I_k is the running integral of I_{k-1} times the
level-k weight.  Weights are sampled on a fixed node grid organised into
"runs": contiguous blocks of uniformly spaced nodes, each lying inside a
single linear segment of the path.  Between runs every weight is zero by
construction (that is the caller's contract), so the running integral is
constant there and only per-run offsets need to be chained.

Within a run the cumulative integral uses composite Simpson: exact for
cubics at panel boundaries, O(h^4) at panel midpoints.  Runs all share one
node count so the whole level update is a handful of vectorised array ops.

Values of deep integrals can underflow (they shrink roughly geometrically
with nesting depth), so the recursion renormalises each level and carries
the total magnitude separately; see ScaledValue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScaledValue:
    """A real number stored as mantissa * exp(log_scale), plus its mass.

    ``mass`` is the L1 size of the final-level integrand on the same scale
    as the mantissa.  It calibrates the zero test: a value whose magnitude
    is a tiny fraction of the mass that produced it is numerically
    indistinguishable from an exact cancellation.
    """

    mantissa: float
    log_scale: float
    mass: float

    @property
    def value(self) -> float:
        """Plain float value (may underflow to 0.0 for very deep words)."""
        if self.mantissa == 0.0:
            return 0.0
        return self.mantissa * math.exp(self.log_scale)

    @property
    def log10_abs(self) -> float:
        if self.mantissa == 0.0:
            return -math.inf
        return (math.log10(abs(self.mantissa))
                + self.log_scale / math.log(10.0))

    def is_nonzero(self, rel: float = 1e-8) -> bool:
        """Scale-aware zero test: |value| above ``rel`` times its own mass."""
        return self.mass > 0.0 and abs(self.mantissa) > rel * self.mass

    @staticmethod
    def exact_zero() -> "ScaledValue":
        return ScaledValue(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class QuadratureGrid:
    """Simpson node grid along a path, grouped into uniform runs.

    times:   (R, M) node times, M odd, time-ordered across runs
    points:  (R, M, d) path positions at the nodes
    slopes:  (R, d) path velocity on each run's segment
    h:       (R,) node spacing per run
    """

    times: np.ndarray
    points: np.ndarray
    slopes: np.ndarray
    h: np.ndarray

    @property
    def n_runs(self) -> int:
        return self.times.shape[0]

    @property
    def nodes_per_run(self) -> int:
        return self.times.shape[1]

    def simpson_weights(self) -> np.ndarray:
        """Integration weights matching the cumulative rule, shape (R, M)."""
        _, m = self.times.shape
        pattern = np.ones(m)
        pattern[1:-1:2] = 4.0
        pattern[2:-1:2] = 2.0
        return pattern[None, :] * (self.h[:, None] / 3.0)


def build_grid(path, pieces, panels: int) -> QuadratureGrid:
    """Grid with one run per piece; a piece is (segment_index, t_lo, t_hi).

    Pieces must be time-ordered and each contained in one linear segment of
    the path.  ``panels`` Simpson panels per piece give 2 * panels + 1 nodes.
    """
    if panels < 1:
        raise ValueError("panels must be >= 1")
    m = 2 * panels + 1
    n = len(pieces)
    d = path.dim
    times = np.empty((n, m))
    points = np.empty((n, m, d))
    slopes = np.empty((n, d))
    h = np.empty(n)
    seg_t = path.times
    seg_p = path.points
    for r, (seg, t_lo, t_hi) in enumerate(pieces):
        t0, t1 = seg_t[seg], seg_t[seg + 1]
        slope = (seg_p[seg + 1] - seg_p[seg]) / (t1 - t0)
        ts = np.linspace(t_lo, t_hi, m)
        times[r] = ts
        points[r] = seg_p[seg] + (ts[:, None] - t0) * slope
        slopes[r] = slope
        h[r] = (t_hi - t_lo) / (m - 1)
    return QuadratureGrid(times, points, slopes, h)


def segment_pieces(path, t_lo: float = 0.0, t_hi: float = 1.0):
    """One piece per path segment, clipped to [t_lo, t_hi]."""
    if not 0.0 <= t_lo < t_hi <= 1.0:
        raise ValueError("need 0 <= t_lo < t_hi <= 1")
    pieces = []
    for seg in range(path.n_samples - 1):
        a = max(path.times[seg], t_lo)
        b = min(path.times[seg + 1], t_hi)
        if b > a:
            pieces.append((seg, a, b))
    return pieces


def cumulative_simpson_runs(f: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Within-run cumulative integral of per-node values f, shape (R, M).

    Column 0 is zero; even columns follow composite Simpson; odd columns
    integrate the interpolating parabola over the half panel.
    """
    out = np.zeros_like(f)
    if f.shape[1] < 3 or f.shape[1] % 2 == 0:
        raise ValueError("runs need an odd node count >= 3")
    hh = h[:, None]
    pair = (f[:, 0:-2:2] + 4.0 * f[:, 1:-1:2] + f[:, 2::2]) * (hh / 3.0)
    out[:, 2::2] = np.cumsum(pair, axis=1)
    out[:, 1::2] = out[:, 0:-2:2] + (5.0 * f[:, 0:-2:2] + 8.0 * f[:, 1:-1:2]
                                     - f[:, 2::2]) * (hh / 12.0)
    return out


def level_step(grid: QuadratureGrid, inner: np.ndarray,
               weights: np.ndarray) -> tuple[np.ndarray, float]:
    """One nesting level: cumulative integral of inner * weights.

    Returns the new per-node running integral and the L1 mass of the
    integrand (for the scale-aware zero test).
    """
    g = inner * weights
    within = cumulative_simpson_runs(g, grid.h)
    totals = within[:, -1]
    offsets = np.concatenate([[0.0], np.cumsum(totals)[:-1]])
    mass = float(np.sum(np.abs(g) * grid.simpson_weights()))
    return within + offsets[:, None], mass


def nested_value(grid: QuadratureGrid,
                 weight_levels: list[np.ndarray]) -> ScaledValue:
    """Iterated integral along the given per-level weight arrays.

    Each level is renormalised by its max magnitude so that arbitrarily
    deep nestings neither underflow nor overflow; the scale is carried in
    log space.
    """
    if grid.n_runs == 0:
        return ScaledValue.exact_zero()
    inner = np.ones_like(grid.times)
    log_scale = 0.0
    mass = 0.0
    for w in weight_levels:
        inner, mass = level_step(grid, inner, w)
        peak = float(np.max(np.abs(inner)))
        if peak == 0.0:
            return ScaledValue(0.0, log_scale, 0.0)
        inner /= peak
        mass /= peak
        log_scale += math.log(peak)
    return ScaledValue(float(inner[-1, -1]), log_scale, mass)
