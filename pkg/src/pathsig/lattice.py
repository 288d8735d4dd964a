"""Cube-and-tunnel decomposition of R^d and exact visit extraction.

For spacing epsilon and tunnel width delta the open cube with integer label
z has center epsilon * z and edge length epsilon - delta:

    H_z = { x : |x^i - epsilon z^i| < (epsilon - delta) / 2 for all i }.

The complement of all cubes is the closed tunnel set.  Since delta > 0 the
closures of distinct cubes are at least delta apart, so a point belongs to
at most one cube closure; that is what makes visit times unambiguous.

Visits are extracted exactly: each path segment is intersected with the
face inequalities of every nearby cube in closed form, never by sampling
the path on a time grid (grid sampling misses thin excursions and breaks
word recovery downstream).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .paths import PiecewiseLinearPath

LatticeWord = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class CubeLattice:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.delta < self.epsilon:
            raise ValueError("need 0 < delta < epsilon")

    @property
    def half_width(self) -> float:
        return (self.epsilon - self.delta) / 2.0

    def center(self, z) -> np.ndarray:
        return self.epsilon * np.asarray(z, dtype=float)

    def locate(self, point) -> tuple[int, ...] | None:
        """Label of the open cube containing the point, or None in a tunnel.

        The nearest lattice center is the only candidate; membership uses
        strict inequalities, so points exactly on a face count as tunnel.
        """
        p = np.asarray(point, dtype=float)
        z = np.rint(p / self.epsilon).astype(int)
        if np.all(np.abs(p - self.epsilon * z) < self.half_width):
            return tuple(int(v) for v in z)
        return None


def locate(point, lattice: CubeLattice):
    return lattice.locate(point)


def is_admissible(word) -> bool:
    """Admissible words start at 0 and never repeat a label consecutively."""
    if len(word) == 0:
        return False
    if any(v != 0 for v in word[0]):
        return False
    return all(word[i] != word[i + 1] for i in range(len(word) - 1))


@dataclass(frozen=True)
class VisitRecord:
    """Ordered cube visits of a path: word (z_0 = 0, ..., z_m), entry times
    tau_1 < ... < tau_m, and the count N = m."""

    word: LatticeWord
    times: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.word) - 1:
            raise ValueError("need one entry time per visit after the start")
        if not is_admissible(self.word):
            raise ValueError("visit word must be admissible")
        if any(self.times[i] >= self.times[i + 1]
               for i in range(len(self.times) - 1)):
            raise ValueError("visit times must be strictly increasing")

    @property
    def count(self) -> int:
        return len(self.word) - 1

    def to_json(self) -> dict:
        return {"word": [list(z) for z in self.word],
                "times": list(self.times)}

    @staticmethod
    def from_json(data: dict) -> "VisitRecord":
        return VisitRecord(tuple(tuple(int(v) for v in z) for z in data["word"]),
                           tuple(float(t) for t in data["times"]))


def save_visit_record(record: VisitRecord, file: str | Path) -> None:
    with open(file, "w") as fh:
        json.dump(record.to_json(), fh, indent=2)
        fh.write("\n")


def _segment_cube_intervals(p0, p1, t0, t1, lattice: CubeLattice,
                            exclude=None):
    """Open time intervals (a, b, z) where the segment lies inside cube z.

    Candidates are the integer boxes met by the segment's bounding box; for
    each, the 2d face inequalities reduce to an interval intersection in
    the segment parameter.  Distinct cubes give disjoint intervals.
    """
    w = lattice.half_width
    eps = lattice.epsilon
    d = len(p0)
    lo = np.minimum(p0, p1)
    hi = np.maximum(p0, p1)
    ranges = []
    for i in range(d):
        z_min = math.ceil((lo[i] - w) / eps)
        z_max = math.floor((hi[i] + w) / eps)
        if z_min > z_max:
            return []
        ranges.append(range(z_min, z_max + 1))
    dt = t1 - t0
    out = []
    for z in itertools.product(*ranges):
        if z == exclude:
            continue
        a, b = t0, t1
        for i in range(d):
            c = eps * z[i]
            v = (p1[i] - p0[i]) / dt
            if v == 0.0:
                if not abs(p0[i] - c) < w:
                    a = t1
                    break
                continue
            # |p0 + v (t - t0) - c| < w
            ta = t0 + (c - w - p0[i]) / v
            tb = t0 + (c + w - p0[i]) / v
            if ta > tb:
                ta, tb = tb, ta
            a = max(a, ta)
            b = min(b, tb)
            if a >= b:
                break
        if a < b:
            out.append((a, b, z))
    out.sort(key=lambda item: (item[0], item[2]))
    return out


def cube_pieces(path: PiecewiseLinearPath, lattice: CubeLattice):
    """Time-ordered list of (segment_index, t_lo, t_hi, label) pieces where
    the path runs inside an open cube."""
    pieces = []
    for seg in range(path.n_samples - 1):
        t0, t1 = path.times[seg], path.times[seg + 1]
        p0, p1 = path.points[seg], path.points[seg + 1]
        for a, b, z in _segment_cube_intervals(p0, p1, t0, t1, lattice):
            pieces.append((seg, a, b, z))
    return pieces


def visit_sequence(path: PiecewiseLinearPath, lattice: CubeLattice,
                   pieces=None) -> VisitRecord:
    """Exact visit word and entry times of a path.

    A piece labelled differently from the current cube starts the next
    visit, so re-entering the current cube before any other does not count.
    Entries at t = 1 exactly do not count either (the recursion only counts
    tau < 1).  Simultaneous entries into two cubes cannot occur for
    delta > 0, but ties would resolve to the lexicographically smallest
    label through the piece ordering.
    """
    if pieces is None:
        pieces = cube_pieces(path, lattice)
    label = (0,) * path.dim
    if lattice.locate(path.points[0]) != label:
        raise ValueError("path must start inside the cube at the origin")
    word = [label]
    times = []
    t_cur = 0.0
    for _, a, b, z in pieces:
        if z == label or b <= t_cur:
            continue
        tau = max(a, t_cur)
        if tau >= 1.0:
            continue
        word.append(z)
        times.append(tau)
        label = z
        t_cur = tau
    return VisitRecord(tuple(word), tuple(times))
