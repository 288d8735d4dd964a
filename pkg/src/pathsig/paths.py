"""Piecewise-linear paths on [0, 1] starting at the origin.

Every path entering the library is a polygonal interpolation: continuous
paths are represented by their values on a knot grid, and every quantity we
compute (signatures, integrals along one-forms, cube visits) is evaluated
exactly on that polygonal representative.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tensor import TensorSeries, concat, segment_signature, unit_series


@dataclass(frozen=True)
class PiecewiseLinearPath:
    """Polygonal path: strictly increasing times in [0, 1], points in R^d.

    Invariants: times[0] = 0, times[-1] = 1, points[0] = origin, at least
    two knots, constant dimension.
    """

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.points, dtype=float)
        if t.ndim != 1 or p.ndim != 2 or t.size != p.shape[0]:
            raise ValueError("times must be (n,), points (n, d) with matching n")
        if t.size < 2:
            raise ValueError("a path needs at least two knots")
        if t[0] != 0.0 or t[-1] != 1.0:
            raise ValueError("times must start at 0 and end at 1")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(p[0] != 0.0):
            raise ValueError("paths start at the origin")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_samples(self) -> int:
        return self.times.size

    def at(self, t) -> np.ndarray:
        """Evaluate the path at scalar or array times (linear interpolation)."""
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape + (self.dim,))
        for i in range(self.dim):
            out[..., i] = np.interp(t, self.times, self.points[:, i])
        return out

    def increments(self) -> np.ndarray:
        return np.diff(self.points, axis=0)

    def length(self) -> float:
        """Polygonal (total variation) length."""
        return float(np.sum(np.linalg.norm(self.increments(), axis=1)))

    def with_extra_knots(self, extra_times) -> "PiecewiseLinearPath":
        """Same path re-expressed with additional (collinear) knots."""
        t = np.union1d(self.times, np.asarray(extra_times, dtype=float))
        t = t[(t >= 0.0) & (t <= 1.0)]
        return PiecewiseLinearPath(t, self.at(t))


def from_points(points, times=None) -> PiecewiseLinearPath:
    """Path through the given points, uniform in time unless times given."""
    p = np.asarray(points, dtype=float)
    if times is None:
        times = np.linspace(0.0, 1.0, p.shape[0])
    return PiecewiseLinearPath(np.asarray(times, dtype=float), p)


@dataclass(frozen=True)
class Reparametrization:
    """Strictly increasing piecewise-linear self-map of [0, 1] fixing 0 and 1."""

    knots_in: np.ndarray
    knots_out: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.knots_in, dtype=float)
        v = np.asarray(self.knots_out, dtype=float)
        if u.shape != v.shape or u.ndim != 1 or u.size < 2:
            raise ValueError("knots_in/knots_out must be matching 1-d arrays")
        if u[0] != 0.0 or u[-1] != 1.0 or v[0] != 0.0 or v[-1] != 1.0:
            raise ValueError("a reparametrization fixes the endpoints")
        if np.any(np.diff(u) <= 0) or np.any(np.diff(v) <= 0):
            raise ValueError("a reparametrization is strictly increasing")
        object.__setattr__(self, "knots_in", u)
        object.__setattr__(self, "knots_out", v)

    def __call__(self, t):
        return np.interp(t, self.knots_in, self.knots_out)

    def inverse(self) -> "Reparametrization":
        return Reparametrization(self.knots_out, self.knots_in)

    @staticmethod
    def identity() -> "Reparametrization":
        return Reparametrization(np.array([0.0, 1.0]), np.array([0.0, 1.0]))


def reparametrize(path: PiecewiseLinearPath, sigma: Reparametrization,
                  n_out: int | None = None) -> PiecewiseLinearPath:
    """The path t -> x(sigma(t)).

    With ``n_out`` the result is resampled on a uniform grid of that many
    knots.  Without it the exact composite is returned: both the path and
    sigma are piecewise linear, so placing knots at sigma's knots and at the
    preimages of the path's knots reproduces x o sigma exactly.
    """
    if n_out is not None:
        if n_out < 2:
            raise ValueError("n_out must be >= 2")
        t = np.linspace(0.0, 1.0, n_out)
    else:
        inv = sigma.inverse()
        t = np.union1d(sigma.knots_in, inv(path.times))
    return PiecewiseLinearPath(t, path.at(sigma(t)))


def concat_paths(a: PiecewiseLinearPath, b: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Concatenation: run a on [0, 1/2], then b translated to a's endpoint."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    times = np.concatenate([a.times / 2.0, 0.5 + b.times[1:] / 2.0])
    points = np.vstack([a.points, b.points[1:] + a.points[-1]])
    return PiecewiseLinearPath(times, points)


def reverse_path(p: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """Time reversal, translated to start at the origin."""
    times = 1.0 - p.times[::-1]
    points = p.points[::-1] - p.points[-1]
    return PiecewiseLinearPath(times, points)


def path_signature(path: PiecewiseLinearPath, level: int) -> TensorSeries:
    """Truncated signature of a polygonal path.

    Left fold of per-segment tensor exponentials under concatenation; by
    Chen's identity this is the signature of the whole path.
    """
    sig = unit_series(path.dim, level)
    for v in path.increments():
        sig = concat(sig, segment_signature(v, level))
    return sig


def p_variation_lower_bound(x: PiecewiseLinearPath, y: PiecewiseLinearPath,
                            p: float, level: int, dyadic_depth: int = 8) -> float:
    """Dyadic-partition lower bound for the p-variation distance of two lifts.

    The true metric takes a supremum over all partitions of [0, 1]; here
    only dyadic partitions up to the given depth are scanned, so the result
    is a lower bound and a diagnostic, not the metric itself.
    """
    if x.dim != y.dim:
        raise ValueError("dimension mismatch")
    if p < 1:
        raise ValueError("p must be >= 1")
    best = 0.0
    for depth in range(dyadic_depth + 1):
        grid = np.linspace(0.0, 1.0, 2**depth + 1)
        sigs_x = _interval_signatures(x, grid, level)
        sigs_y = _interval_signatures(y, grid, level)
        for i in range(1, level + 1):
            total = 0.0
            for sx, sy in zip(sigs_x, sigs_y):
                diff = np.linalg.norm(sx.levels[i] - sy.levels[i])
                total += diff ** (p / i)
            best = max(best, total ** (i / p))
    return best


def _interval_signatures(path: PiecewiseLinearPath, grid: np.ndarray,
                         level: int) -> list[TensorSeries]:
    refined = path.with_extra_knots(grid)
    out = []
    for lo, hi in zip(grid[:-1], grid[1:]):
        mask = (refined.times >= lo) & (refined.times <= hi)
        pts = refined.points[mask]
        sig = unit_series(path.dim, level)
        for v in np.diff(pts, axis=0):
            sig = concat(sig, segment_signature(v, level))
        out.append(sig)
    return out


def save_csv(path: PiecewiseLinearPath, file: str | Path) -> None:
    """Write the knot table as CSV with columns t, x1..xd."""
    with open(file, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x{i + 1}" for i in range(path.dim)])
        for t, p in zip(path.times, path.points):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in p])


def load_csv(file: str | Path) -> PiecewiseLinearPath:
    with open(file, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"empty path file: {file}")
    header = rows[0]
    if not header or header[0] != "t":
        raise ValueError(f"malformed path file (expected 't,x1,...' header): {file}")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    if data.size == 0:
        raise ValueError(f"path file has no samples: {file}")
    return PiecewiseLinearPath(data[:, 0], data[:, 1:])


def save_json(path: PiecewiseLinearPath, file: str | Path,
              metadata: dict | None = None) -> None:
    """JSON envelope: dim, sample count, provenance metadata, knot data."""
    payload = {
        "dim": path.dim,
        "n_samples": path.n_samples,
        "metadata": metadata or {},
        "times": [float(t) for t in path.times],
        "points": [[float(v) for v in p] for p in path.points],
    }
    with open(file, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_json(file: str | Path) -> tuple[PiecewiseLinearPath, dict]:
    with open(file) as fh:
        payload = json.load(fh)
    for key in ("dim", "times", "points"):
        if key not in payload:
            raise ValueError(f"path JSON missing field {key!r}: {file}")
    path = PiecewiseLinearPath(np.asarray(payload["times"], dtype=float),
                               np.asarray(payload["points"], dtype=float))
    if path.dim != payload["dim"]:
        raise ValueError("declared dim does not match point data")
    return path, payload.get("metadata", {})


def load_path(file: str | Path) -> tuple[PiecewiseLinearPath, dict]:
    """Load a path from .csv or .json by extension."""
    file = Path(file)
    if file.suffix == ".json":
        return load_json(file)
    return load_csv(file), {}
