"""Recovering the visited-cube word of a path from extended signatures.

Attach to every lattice cube the bump one-form supported on its closure.
For a path whose visit word is w = (z_0 = 0, ..., z_m), the iterated
integral along the forms of a candidate word behaves sharply:

* along w itself it factorizes into the product of per-visit single
  integrals and is (almost surely) nonzero;
* along any longer word, and along any different word of the same length,
  it is exactly zero.

So the visit word is the unique maximal-length word with a nonzero
extended signature, and since extended signatures are determined by the
signature, the word is recoverable from the signature alone.

The search below queries only whole-interval word values (no peeking at
visit times).  A greedy chain extends the word while some extension is
nonzero; greedy alone can skip visits (any order-preserving subsequence of
the true word is also nonzero), so an insertion-repair loop follows: while
some single-letter insertion has a nonzero value, apply it.  Every
nonzero word is an order-embeddable subsequence of the true word, and a
strict subsequence always admits a one-letter insertion that is again
embeddable, so the repair loop terminates at the true word.  A final
verification pass requires every single-letter substitution and insertion
to vanish; a failure is reported as ambiguous rather than returned as an
answer, so heuristic pruning can never silently produce a wrong word.

Zero tests are scale-aware rather than absolute: word values shrink
roughly geometrically with word length (each visit contributes a factor
well below 1), while wrong words evaluate to exact zeros in this
quadrature (their integrands never overlap the support of a nonzero inner
integral).  A value counts as nonzero when it exceeds ``tau_rel`` times
the integrated magnitude that produced it.
"""

from __future__ import annotations

import csv
import math
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .gaussian import GaussianModel, sample_path, trial_model
from .lattice import (CubeLattice, LatticeWord, VisitRecord, cube_pieces,
                      is_admissible, visit_sequence)
from .one_forms import BumpOneForm
from .paths import PiecewiseLinearPath, from_points
from .quadrature import build_grid

APPROXIMATION_CONSTANT = 11.0  # sup-error bound is 11 sqrt(d) epsilon


class RecoveryError(Exception):
    pass


class AmbiguousRecovery(RecoveryError):
    """Verification failed: competing words also evaluate as nonzero."""

    def __init__(self, word: LatticeWord, competing: list[LatticeWord]):
        self.word = word
        self.competing = competing
        super().__init__(f"recovered word failed verification against "
                         f"{len(competing)} competing candidate(s)")


class SearchBudgetExceeded(RecoveryError):
    pass


@dataclass(frozen=True)
class ReconstructionConfig:
    """Knobs for word recovery.

    ``bounds`` is the spatial box whose intersecting cubes form the
    candidate set (the integer lattice is infinite; the search space is
    not).  ``tau_rel`` thresholds the signed value against its own mass in
    reports and factorization checks; the search's zero test itself is the
    exact tuple-reachability criterion of WordValue (see there), which is
    sharper than any float threshold.  ``panels`` sets the Simpson panels
    per in-cube piece of the quadrature.
    """

    lattice: CubeLattice
    max_word_length: int = 400
    tau_rel: float = 1e-8
    bounds: tuple[float, float] = (-3.0, 3.0)
    panels: int = 8


@dataclass(frozen=True)
class WordValue:
    """Extended-signature value of a word along bump forms.

    The signed value is mantissa * exp(log_scale) with ``mass`` the L1 size
    of the sum on the same scale.  ``log_tuple_max`` is the log of the
    largest single run-tuple product contributing to the sum, computed
    entirely in log space: it is finite if and only if at least one
    increasing run tuple matches the word, which is the exact discrete
    counterpart of "the extended signature is not identically zero".  The
    zero test uses it rather than the signed float (which can flush to
    zero across shallow cube grazes hundreds of orders below the top
    scale).
    """

    mantissa: float
    log_scale: float
    mass: float
    log_tuple_max: float

    @property
    def value(self) -> float:
        if self.mantissa == 0.0:
            return 0.0
        return self.mantissa * math.exp(self.log_scale)

    @property
    def log10_abs(self) -> float:
        if self.mantissa == 0.0:
            return -math.inf
        return math.log10(abs(self.mantissa)) + self.log_scale / math.log(10.0)

    def is_nonzero(self) -> bool:
        return self.log_tuple_max > -math.inf

    @staticmethod
    def exact_zero() -> "WordValue":
        return WordValue(0.0, 0.0, 0.0, -math.inf)


@dataclass(frozen=True)
class _ChainState:
    """Forward or backward accumulator over runs.

    ``signed[r]`` is the (renormalised) sum over run tuples of the
    represented sub-word staying strictly before run r (strictly after,
    for backward states), times exp(log_scale); ``tropical[r]`` is the log
    of the largest such tuple product, exact in log space.
    """

    signed: np.ndarray
    log_scale: float
    tropical: np.ndarray


def _logsumexp_rows(a: np.ndarray) -> np.ndarray:
    mx = np.max(a, axis=1)
    out = np.full(a.shape[0], -np.inf)
    ok = mx > -np.inf
    if np.any(ok):
        out[ok] = mx[ok] + np.log(np.sum(np.exp(a[ok] - mx[ok, None]), axis=1))
    return out


class PathWordEvaluator:
    """Answers word extended-signature queries for one fixed path.

    The default evaluator behind :func:`recover_word`.  It splits the path
    at its exact cube-boundary crossings into in-cube pieces (runs) and
    precomputes, per cube, the Simpson integral of the cube's bump form
    over each of its runs.  Because consecutive word letters name distinct
    cubes, the inner integral of the nesting is constant across every run
    the next form integrates over, so the nested quadrature value reduces
    exactly to

        value(w) = sum over run tuples r_1 < ... < r_n, r_k in runs(z_k),
                   of the product of the per-run form integrals,

    evaluated by chained prefix sums.  Words whose cubes the path never
    meets in the required order therefore come out exactly zero, which is
    the discrete shadow of the vanishing statements behind word recovery.

    Two parallel accumulators run per word.  The signed chain carries the
    actual value, renormalised letter by letter (word values shrink
    geometrically with length).  The tropical chain carries, per run, the
    log of the best tuple product; it decides zero versus nonzero exactly,
    because a run's integrand has constant sign (phi >= 0 and the velocity
    is constant per run), so |run total| equals the run's mass and a word
    has nonzero mass if and only if a matching increasing run tuple
    exists.  Per-run form integrals are computed from log phi, so even
    excursions grazing a cube hundreds of orders below float range keep
    finite logs and stay detectable.

    Nonzero prefixes are cached, and scans of one-letter edits use the
    forward/backward splice

        value(pre + (z,) + suf) = sum_r fwd_pre[r] * totals_z[r] * bwd_suf[r],

    which prices a whole scan row at one sparse dot product.
    """

    def __init__(self, path: PiecewiseLinearPath, config: ReconstructionConfig,
                 cache_size: int = 8192):
        self.path = path
        self.config = config
        self.lattice = config.lattice
        self.dim = path.dim
        pieces = cube_pieces(path, config.lattice)
        self.grid = build_grid(path, [(seg, a, b) for seg, a, b, _ in pieces],
                               panels=config.panels)
        self.n_runs = self.grid.n_runs
        self._runs_by_cube: dict[tuple[int, ...], np.ndarray] = {}
        for r, (_, _, _, z) in enumerate(pieces):
            self._runs_by_cube.setdefault(z, []).append(r)
        for z, idx in self._runs_by_cube.items():
            self._runs_by_cube[z] = np.asarray(idx, dtype=int)
        self._totals: dict[tuple[int, ...], tuple] = {}
        self._simpson = self.grid.simpson_weights()
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache_size
        self._flat_cache = None
        self.root = (0,) * self.dim

    # -- query interface ------------------------------------------------------

    def candidate_cubes(self) -> list[tuple[int, ...]]:
        """Cubes worth querying: met by the path and inside the bounding box.

        Any other cube in the box would evaluate to exact zero in every
        position, so skipping the query loses nothing.
        """
        lo, hi = self.config.bounds
        eps = self.lattice.epsilon
        out = [z for z in self._runs_by_cube
               if all(lo <= eps * zi <= hi for zi in z)]
        return sorted(out)

    def value(self, word: LatticeWord) -> WordValue:
        """Extended signature of the path along the word's bump forms."""
        state = self._unit_state()
        mantissa, mass, trop = 1.0, 0.0, 0.0
        start = 0
        for k in range(len(word), 0, -1):
            hit = self._cache.get(word[:k])
            if hit is not None:
                self._cache.move_to_end(word[:k])
                if hit == "zero":
                    return WordValue.exact_zero()
                state, mantissa, mass, trop = hit
                start = k
                break
        for k in range(start, len(word)):
            prefix = word[:k + 1]
            stepped = self._forward_step(state, word[k])
            if stepped is None:
                self._remember(prefix, "zero")
                return WordValue.exact_zero()
            state, mantissa, mass, trop = stepped
            self._remember(prefix, stepped)
        return WordValue(mantissa, state.log_scale, mass, trop)

    def nonzero(self, word: LatticeWord) -> bool:
        return self.value(word).is_nonzero()

    def single_integral(self, z, t_lo: float, t_hi: float) -> float:
        """Integral of the cube-z bump form over runs starting in [t_lo, t_hi)."""
        sign, logabs = self.single_integral_log(z, t_lo, t_hi)
        if logabs == -math.inf:
            return 0.0
        return sign * math.exp(logabs)

    def single_integral_log(self, z, t_lo: float,
                            t_hi: float) -> tuple[float, float]:
        """Same integral as (sign, log magnitude); robust to tiny grazes."""
        z = tuple(z)
        if z not in self._runs_by_cube:
            return 0.0, -math.inf
        idx = self._runs_by_cube[z]
        scaled, log_peak, _ = self._cube_totals(z)
        starts = self.grid.times[idx, 0]
        sel = (starts >= t_lo) & (starts < t_hi)
        total = float(np.sum(scaled[sel]))
        if total == 0.0 or log_peak == -math.inf:
            return 0.0, -math.inf
        return math.copysign(1.0, total), math.log(abs(total)) + log_peak

    # -- splice interface for one-letter edit scans ----------------------------

    def forward_states(self, word: LatticeWord) -> list[_ChainState | None]:
        """States after word[:k] for k = 0..len(word); None once dead."""
        self.value(word)
        states: list[_ChainState | None] = [self._unit_state()]
        for k in range(1, len(word) + 1):
            hit = self._cache.get(word[:k])
            states.append(None if hit is None or hit == "zero" else hit[0])
        return states

    def backward_states(self, word: LatticeWord) -> list[_ChainState | None]:
        """States of the suffixes word[k:] for k = 0..len(word)."""
        states: list[_ChainState | None] = [self._unit_state()]
        for letter in reversed(word):
            states.append(self._backward_step(states[-1], letter))
        states.reverse()
        return states

    def splice_value(self, fwd: _ChainState | None, z,
                     bwd: _ChainState | None) -> WordValue:
        """Value of (prefix + (z,) + suffix) from the two chain states.

        Exactness needs the neighbouring letters to differ from z, which
        admissibility guarantees: then both chain accumulators are constant
        across every z-run.
        """
        idx = self._runs_by_cube.get(tuple(z))
        if idx is None or fwd is None or bwd is None:
            return WordValue.exact_zero()
        scaled, log_peak, logmag = self._cube_totals(tuple(z))
        f = fwd.signed[idx]
        b = bwd.signed[idx]
        mantissa = float(np.sum(f * scaled * b))
        mass = float(np.sum(np.abs(f) * np.abs(scaled) * np.abs(b)))
        trop = float(np.max(fwd.tropical[idx] + logmag + bwd.tropical[idx]))
        return WordValue(mantissa, fwd.log_scale + bwd.log_scale + log_peak,
                         mass, trop)

    @property
    def scan_cubes(self) -> list[tuple[int, ...]]:
        """All touched cubes in the fixed order used by splice_scan."""
        return self._flat()[0]

    def splice_scan(self, fwd: _ChainState | None,
                    bwd: _ChainState | None) -> np.ndarray:
        """Tropical splice against every touched cube at once.

        Entry i is the log of the best run tuple for (prefix + (scan_cubes
        [i],) + suffix); -inf marks the exact zeros.  Runs partition into
        cubes, so one grouped max over all runs prices the whole scan row.
        """
        cubes, perm, starts, logmag = self._flat()
        if fwd is None or bwd is None or self.n_runs == 0:
            return np.full(len(cubes), -np.inf)
        scores = fwd.tropical[perm] + logmag + bwd.tropical[perm]
        return np.maximum.reduceat(scores, starts)

    def unit_state(self) -> _ChainState:
        """State of the empty prefix or suffix."""
        return self._unit_state()

    def extend_state(self, state: _ChainState | None, z) -> _ChainState | None:
        """Forward state with letter z appended (None once dead)."""
        if state is None:
            return None
        stepped = self._forward_step(state, z)
        return None if stepped is None else stepped[0]

    def prepend_state(self, state: _ChainState | None, z) -> _ChainState | None:
        """Backward state with letter z prepended (None once dead)."""
        return self._backward_step(state, z)

    # -- internals ------------------------------------------------------------

    def _unit_state(self) -> _ChainState:
        return _ChainState(np.ones(self.n_runs), 0.0, np.zeros(self.n_runs))

    def _flat(self):
        if self._flat_cache is None:
            cubes = sorted(self._runs_by_cube)
            perm, starts, logmag = [], [], []
            offset = 0
            for z in cubes:
                idx = self._runs_by_cube[z]
                _, _, lm = self._cube_totals(z)
                perm.append(idx)
                starts.append(offset)
                logmag.append(lm)
                offset += len(idx)
            self._flat_cache = (cubes, np.concatenate(perm),
                                np.asarray(starts, dtype=int),
                                np.concatenate(logmag))
        return self._flat_cache

    def _remember(self, word, entry):
        self._cache[word] = entry
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)

    def _cube_totals(self, z):
        """Per-run integrals of the cube's bump form, in scaled/log form.

        Within a run phi >= 0 and the velocity is constant, so the
        integral has the sign of the x^1 slope and magnitude equal to the
        run's mass; both come from log phi so shallow grazes keep finite
        logs instead of flushing to zero.
        """
        got = self._totals.get(z)
        if got is None:
            idx = self._runs_by_cube[z]
            form = BumpOneForm(self.lattice.center(z), self.lattice.half_width)
            pts = self.grid.points[idx].reshape(-1, self.dim)
            logphi = form.log_first_component(pts).reshape(len(idx), -1)
            slopes = self.grid.slopes[idx, 0]
            with np.errstate(divide="ignore"):
                logmag = (_logsumexp_rows(logphi + np.log(self._simpson[idx]))
                          + np.log(np.abs(slopes)))
            log_peak = float(np.max(logmag, initial=-np.inf))
            if log_peak == -np.inf:
                scaled = np.zeros(len(idx))
            else:
                scaled = np.sign(slopes) * np.exp(logmag - log_peak)
            got = (scaled, log_peak, logmag)
            self._totals[z] = got
        return got

    def _forward_step(self, state: _ChainState, z):
        """Append letter z; None means exactly zero, now and forever."""
        idx = self._runs_by_cube.get(tuple(z))
        if idx is None or self.n_runs == 0:
            return None
        scaled, log_peak, logmag = self._cube_totals(tuple(z))
        tcontrib = np.full(self.n_runs, -np.inf)
        tcontrib[idx] = state.tropical[idx] + logmag
        tchain = np.maximum.accumulate(tcontrib)
        trop = float(tchain[-1])
        if trop == -math.inf:
            return None
        new_trop = np.empty(self.n_runs)
        new_trop[0] = -np.inf
        new_trop[1:] = tchain[:-1]
        f = state.signed[idx]
        contrib = np.zeros(self.n_runs)
        contrib[idx] = f * scaled
        chain = np.cumsum(contrib)
        peak = float(np.max(np.abs(chain)))
        div = peak if peak > 0.0 else 1.0
        nxt = np.empty(self.n_runs)
        nxt[0] = 0.0
        nxt[1:] = chain[:-1] / div
        mass = float(np.sum(np.abs(f) * np.abs(scaled))) / div
        log_scale = state.log_scale + log_peak + (math.log(div) if peak else 0.0)
        return (_ChainState(nxt, log_scale, new_trop),
                float(chain[-1]) / div, mass, trop)

    def _backward_step(self, state: _ChainState | None, z):
        """Prepend letter z to a suffix state."""
        if state is None:
            return None
        idx = self._runs_by_cube.get(tuple(z))
        if idx is None or self.n_runs == 0:
            return None
        scaled, log_peak, logmag = self._cube_totals(tuple(z))
        tcontrib = np.full(self.n_runs, -np.inf)
        tcontrib[idx] = state.tropical[idx] + logmag
        tchain = np.maximum.accumulate(tcontrib[::-1])
        if tchain[-1] == -math.inf:
            return None
        new_trop = np.empty(self.n_runs)
        new_trop[-1] = -np.inf
        new_trop[:-1] = tchain[-2::-1]
        contrib = np.zeros(self.n_runs)
        contrib[idx] = state.signed[idx] * scaled
        chain = np.cumsum(contrib[::-1])
        peak = float(np.max(np.abs(chain)))
        div = peak if peak > 0.0 else 1.0
        nxt = np.empty(self.n_runs)
        nxt[-1] = 0.0
        nxt[:-1] = chain[-2::-1] / div
        log_scale = state.log_scale + log_peak + (math.log(div) if peak else 0.0)
        return _ChainState(nxt, log_scale, new_trop)


def word_extended_signature(path: PiecewiseLinearPath, word: LatticeWord,
                            lattice: CubeLattice, panels: int = 8) -> float:
    """Extended signature of the path along the bump forms of a word."""
    config = ReconstructionConfig(lattice=lattice, panels=panels,
                                  bounds=(-math.inf, math.inf))
    return PathWordEvaluator(path, config).value(word).value


def recover_word(evaluator, config: ReconstructionConfig | None = None,
                 ) -> LatticeWord:
    """Recover the visit word from extended-signature queries alone.

    ``evaluator`` provides the PathWordEvaluator query interface (value,
    candidate_cubes, root, and the splice scans); a PiecewiseLinearPath is
    wrapped in the default path-backed evaluator (then ``config`` is
    required).  Only whole-interval word values are ever consulted; visit
    times are never read.

    Raises AmbiguousRecovery when verification finds competing nonzero
    words (so a pruning mistake surfaces instead of becoming a wrong
    answer), and SearchBudgetExceeded when the word would exceed the
    configured maximum length.
    """
    if isinstance(evaluator, PiecewiseLinearPath):
        if config is None:
            raise ValueError("config is required when passing a raw path")
        evaluator = PathWordEvaluator(evaluator, config)
    cfg = config if config is not None else evaluator.config
    unit = evaluator.unit_state()
    cubes = evaluator.scan_cubes
    cube_pos = {z: i for i, z in enumerate(cubes)}
    allowed = set(evaluator.candidate_cubes())
    blocked = np.array([z not in allowed for z in cubes])

    def best_candidate(fwd, bwd, excluded):
        trop = evaluator.splice_scan(fwd, bwd)
        trop[blocked] = -np.inf
        for z in excluded:
            if z in cube_pos:
                trop[cube_pos[z]] = -np.inf
        i = int(np.argmax(trop)) if trop.size else 0
        if trop.size == 0 or trop[i] == -np.inf:
            return None
        return cubes[i]

    def check_budget(length):
        if length - 1 > cfg.max_word_length:
            raise SearchBudgetExceeded(
                f"word exceeds maximum length {cfg.max_word_length}")

    # greedy chain: follow the strongest nonzero extension
    word: LatticeWord = (evaluator.root,)
    fstate = evaluator.extend_state(unit, evaluator.root)
    while fstate is not None:
        best = best_candidate(fstate, unit, (word[-1],))
        if best is None:
            break
        word = word + (best,)
        check_budget(len(word))
        fstate = evaluator.extend_state(fstate, best)

    # insertion repair: a greedy chain may have skipped visits (any
    # order-preserving subsequence of the true word is nonzero too).
    # Sweep the slots right to left, growing the backward suffix state as
    # letters are absorbed, so every splice is a fresh whole-word value of
    # the word as repaired so far; iterate sweeps until one comes up empty.
    while True:
        fwd = evaluator.forward_states(word)
        bstate = unit
        rebuilt: list = []
        changed = False
        for pos in range(len(word), 0, -1):
            while True:
                front = rebuilt[0] if rebuilt else None
                best = best_candidate(fwd[pos], bstate, (word[pos - 1], front))
                if best is None:
                    break
                changed = True
                rebuilt.insert(0, best)
                check_budget(len(word) + len(rebuilt))
                bstate = evaluator.prepend_state(bstate, best)
            rebuilt.insert(0, word[pos - 1])
            bstate = evaluator.prepend_state(bstate, word[pos - 1])
        word = tuple(rebuilt)
        if not changed:
            break

    # verification: all single-letter substitutions must vanish too
    # (insertions already vanish: the last repair sweep came up empty)
    fwd = evaluator.forward_states(word)
    bwd = evaluator.backward_states(word)
    competing = []
    for pos in range(1, len(word)):
        trop = evaluator.splice_scan(fwd[pos], bwd[pos + 1])
        trop[blocked] = -np.inf
        for z in (word[pos], word[pos - 1],
                  word[pos + 1] if pos + 1 < len(word) else None):
            if z in cube_pos:
                trop[cube_pos[z]] = -np.inf
        for i in np.flatnonzero(trop > -np.inf):
            competing.append(word[:pos] + (cubes[i],) + word[pos + 1:])
    if competing:
        raise AmbiguousRecovery(word, competing)
    return word


def polygonal_path(word: LatticeWord, times, lattice: CubeLattice,
                   ) -> PiecewiseLinearPath:
    """Polygonal approximation through the visited cube centers.

    Linear from center to center across each inter-visit interval, then
    constant on [tau_m, 1]; the empty word gives the constant origin path.
    """
    word = tuple(tuple(int(v) for v in z) for z in word)
    times = tuple(float(t) for t in times)
    if not is_admissible(word):
        raise ValueError("word must be admissible")
    if len(times) != len(word) - 1:
        raise ValueError("need exactly one entry time per visit after the "
                         "start cube")
    d = len(word[0])
    if len(word) == 1:
        return from_points(np.zeros((2, d)))
    if not all(0.0 < t < 1.0 for t in times):
        raise ValueError("visit times must lie strictly inside (0, 1)")
    if any(times[i] >= times[i + 1] for i in range(len(times) - 1)):
        raise ValueError("visit times must be strictly increasing")
    knot_times = np.array([0.0, *times, 1.0])
    centers = np.array([lattice.center(z) for z in word])
    knot_points = np.vstack([centers, centers[-1]])
    return PiecewiseLinearPath(knot_times, knot_points)


def approximation_error(path: PiecewiseLinearPath,
                        approx: PiecewiseLinearPath) -> float:
    """Exact sup-norm distance of two polygonal paths.

    On each interval between knots of either path the difference is affine
    and the norm convex, so the supremum sits on the union knot grid.
    """
    grid = np.union1d(path.times, approx.times)
    return float(np.max(np.linalg.norm(path.at(grid) - approx.at(grid),
                                       axis=1)))


@dataclass(frozen=True)
class ReconstructionResult:
    """Both recovery routes on one path, plus diagnostics."""

    visit: VisitRecord
    recovered_word: LatticeWord
    agreement: bool
    ambiguous: bool
    competing: tuple[LatticeWord, ...]
    prefix_log10_values: tuple[float, ...]
    polygonal: PiecewiseLinearPath
    sup_error: float
    bound: float


def reconstruct_path(path: PiecewiseLinearPath,
                     config: ReconstructionConfig) -> ReconstructionResult:
    """Run the geometric and the extended-signature route side by side."""
    visit = visit_sequence(path, config.lattice)
    evaluator = PathWordEvaluator(path, config)
    ambiguous = False
    competing: tuple[LatticeWord, ...] = ()
    try:
        recovered = recover_word(evaluator)
    except AmbiguousRecovery as err:
        ambiguous = True
        recovered = err.word
        competing = tuple(err.competing)
    prefix_vals = tuple(evaluator.value(recovered[:k]).log10_abs
                        for k in range(1, len(recovered) + 1))
    poly = polygonal_path(visit.word, visit.times, config.lattice)
    return ReconstructionResult(
        visit=visit,
        recovered_word=recovered,
        agreement=(not ambiguous) and recovered == visit.word,
        ambiguous=ambiguous,
        competing=competing,
        prefix_log10_values=prefix_vals,
        polygonal=poly,
        sup_error=approximation_error(path, poly),
        bound=APPROXIMATION_CONSTANT * math.sqrt(path.dim) * config.lattice.epsilon,
    )


# -- convergence study ---------------------------------------------------------

STUDY_COLUMNS = ("n", "epsilon", "delta", "trial", "sup_error", "bound",
                 "violated", "word_len", "recovered_ok")


@dataclass(frozen=True)
class StudyRow:
    n: int
    epsilon: float
    delta: float
    trial: int
    sup_error: float
    bound: float
    violated: bool
    word_len: int
    recovered_ok: bool | None = None


@dataclass
class StudyResult:
    rows: list[StudyRow] = field(default_factory=list)

    def summary(self) -> dict:
        out = {}
        for n in sorted({row.n for row in self.rows}):
            errs = np.array([r.sup_error for r in self.rows if r.n == n])
            nrows = [r for r in self.rows if r.n == n]
            out[str(n)] = {
                "epsilon": nrows[0].epsilon,
                "delta": nrows[0].delta,
                "trials": len(nrows),
                "median_sup_error": float(np.median(errs)),
                "q10_sup_error": float(np.quantile(errs, 0.10)),
                "q90_sup_error": float(np.quantile(errs, 0.90)),
                "bound": nrows[0].bound,
                "violation_fraction": float(np.mean([r.violated for r in nrows])),
            }
        return out

    def to_csv(self, file: str | Path) -> None:
        with open(file, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(STUDY_COLUMNS)
            for r in self.rows:
                writer.writerow([r.n, repr(r.epsilon), repr(r.delta), r.trial,
                                 repr(r.sup_error), repr(r.bound),
                                 int(r.violated), r.word_len,
                                 "" if r.recovered_ok is None
                                 else int(r.recovered_ok)])


def study_trial(model: GaussianModel, trial: int, n_list, delta_ratio: float,
                check_recovery: bool = False,
                recovery_config: ReconstructionConfig | None = None,
                ) -> list[StudyRow]:
    """All rows for one seeded trial (deterministic given model and trial)."""
    path = sample_path(trial_model(model, trial))
    rows = []
    for n in n_list:
        eps = 1.0 / n
        lattice = CubeLattice(eps, eps / delta_ratio)
        visit = visit_sequence(path, lattice)
        poly = polygonal_path(visit.word, visit.times, lattice)
        err = approximation_error(path, poly)
        bound = APPROXIMATION_CONSTANT * math.sqrt(path.dim) * eps
        recovered_ok = None
        if check_recovery:
            if recovery_config is not None:
                cfg = replace(recovery_config, lattice=lattice)
            else:
                cfg = ReconstructionConfig(lattice=lattice)
            try:
                recovered_ok = recover_word(path, cfg) == visit.word
            except RecoveryError:
                recovered_ok = False
        rows.append(StudyRow(n=n, epsilon=eps, delta=eps / delta_ratio,
                             trial=trial, sup_error=err, bound=bound,
                             violated=err > bound, word_len=visit.count,
                             recovered_ok=recovered_ok))
    return rows


def convergence_study(model: GaussianModel, n_list, trials: int, seed: int,
                      delta_ratio: float = 10.0, check_recovery: bool = False,
                      workers: int = 1) -> StudyResult:
    """Polygonal-approximation error study over lattice refinements.

    For each trial one path is sampled (seed derived from (seed, trial))
    and measured against every refinement epsilon_n = 1/n with
    delta_n = epsilon_n / delta_ratio.  Rows flag trials whose sup-error
    exceeds the 11 sqrt(d) epsilon_n bound; those are the exceptional
    tunnel-travel events, which the delta rule is meant to keep rare.
    """
    n_list = sorted(int(n) for n in n_list)
    if any(n < 1 for n in n_list):
        raise ValueError("lattice refinements must be positive integers")
    base = GaussianModel(model.variant, model.dim, model.hurst,
                         model.n_points, seed)
    result = StudyResult()
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(study_trial, base, t, tuple(n_list),
                                   delta_ratio, check_recovery)
                       for t in range(trials)]
            for fut in futures:
                result.rows.extend(fut.result())
    else:
        for t in range(trials):
            result.rows.extend(study_trial(base, t, tuple(n_list),
                                           delta_ratio, check_recovery))
    result.rows.sort(key=lambda r: (r.n, r.trial))
    return result
