"""Exact-covariance samplers for Gaussian path models with i.i.d. coordinates.

Supported models (per scalar coordinate, on [0, 1], started at 0):

* ``fbm``    fractional Brownian motion, Hurst H in (1/4, 1):
             R(s, t) = (s^2H + t^2H - |t - s|^2H) / 2.
             H = 1/2 is standard Brownian motion.
* ``ou``     standard Ornstein-Uhlenbeck driven from 0:
             R(s, t) = exp(-|t - s|) (1 - exp(-2 min(s, t))) / 2.
* ``bridge`` Brownian bridge B_t - t B_1:  R(s, t) = min(s, t) - s t.

Sampling draws the centered Gaussian vector on a uniform grid from a dense
Cholesky factor of the exact covariance matrix (with a tiny diagonal jitter
ladder as a fallback, reported through warnings), then interpolates
piecewise-linearly.  Factors are cached per (model shape, grid size), so
repeated trials only pay one matrix-vector product each.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .paths import PiecewiseLinearPath

VARIANTS = ("fbm", "ou", "bridge")
_MAX_JITTER = 1e-10
_factor_cache: dict[tuple, np.ndarray] = {}


@dataclass(frozen=True)
class GaussianModel:
    variant: str
    dim: int = 2
    hurst: float | None = None
    n_points: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; "
                             f"expected one of {VARIANTS}")
        if self.variant == "fbm":
            if self.hurst is None or not 0.25 < self.hurst < 1.0:
                raise ValueError("fbm needs a Hurst parameter in (1/4, 1)")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.n_points < 2:
            raise ValueError("n_points must be >= 2")

    def label(self) -> str:
        if self.variant == "fbm":
            return f"fbm(H={self.hurst:g})"
        return self.variant


def covariance(model: GaussianModel, s, t):
    """Closed-form covariance R(s, t) of one scalar coordinate."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(s > 1) or np.any(t < 0) or np.any(t > 1):
        raise ValueError("covariance arguments must lie in [0, 1]")
    if model.variant == "fbm":
        h2 = 2.0 * model.hurst
        r = 0.5 * (s**h2 + t**h2 - np.abs(t - s) ** h2)
    elif model.variant == "ou":
        r = np.exp(-np.abs(t - s)) * (1.0 - np.exp(-2.0 * np.minimum(s, t))) / 2.0
    else:
        r = np.minimum(s, t) - s * t
    return r if r.ndim else float(r)


def covariance_matrix(model: GaussianModel, times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    return covariance(model, t[:, None], t[None, :])


def _cholesky_factor(model: GaussianModel, times: np.ndarray) -> np.ndarray:
    key = (model.variant, model.hurst, len(times))
    cached = _factor_cache.get(key)
    if cached is not None:
        return cached
    gram = covariance_matrix(model, times)
    gram = 0.5 * (gram + gram.T)
    jitter = 0.0
    while True:
        try:
            factor = np.linalg.cholesky(
                gram + jitter * np.eye(len(times)) if jitter else gram)
            break
        except np.linalg.LinAlgError:
            jitter = 1e-14 if jitter == 0.0 else jitter * 100.0
            if jitter > _MAX_JITTER:
                lam = float(np.linalg.eigvalsh(gram)[0])
                raise ValueError(
                    f"covariance matrix for {model.label()} is not positive "
                    f"semidefinite at working precision (min eigenvalue "
                    f"{lam:.3e})") from None
    if jitter:
        warnings.warn(f"covariance factorization for {model.label()} needed "
                      f"diagonal jitter {jitter:.0e}")
    if len(_factor_cache) > 16:
        _factor_cache.clear()
    _factor_cache[key] = factor
    return factor


def sample_path(model: GaussianModel) -> PiecewiseLinearPath:
    """One sample path on a uniform grid, as a piecewise-linear interpolation.

    Coordinates are i.i.d.; X_0 = 0 always, and X_1 = 0 for the bridge, are
    pinned exactly rather than left to covariance degeneracy.  Identical
    models (including seed) give bit-identical paths.
    """
    grid = np.linspace(0.0, 1.0, model.n_points)
    interior = grid[1:-1] if model.variant == "bridge" else grid[1:]
    factor = _cholesky_factor(model, interior)
    rng = np.random.default_rng(np.random.SeedSequence(model.seed))
    z = rng.standard_normal((len(interior), model.dim))
    values = factor @ z
    points = np.zeros((model.n_points, model.dim))
    if model.variant == "bridge":
        points[1:-1] = values
    else:
        points[1:] = values
    return PiecewiseLinearPath(grid, points)


def trial_seed(base_seed: int, trial: int) -> int:
    """Derived seed for an independent trial: SeedSequence([base, trial])."""
    return int(np.random.SeedSequence([base_seed, trial]).generate_state(1)[0])


def trial_model(model: GaussianModel, trial: int) -> GaussianModel:
    return replace(model, seed=trial_seed(model.seed, trial))
