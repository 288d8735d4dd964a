"""Truncated free tensor algebra over R^d.

Coefficients are indexed by words over the alphabet {1, ..., d}.  A word of
length k addresses one coordinate of the level-k tensor, stored densely as a
flat array of d**k floats in base-d order (first letter is the most
significant digit).  Level 0 is the scalar slot; a series representing a
signature always has 1 there.

The three products that matter here:

* ``concat`` is the (truncated) tensor-concatenation product.  For
  signatures over adjacent time intervals it realises Chen's identity.
* ``segment_signature`` is the tensor exponential of a single increment,
  i.e. the signature of a straight-line segment.
* ``shuffle`` is the combinatorial shuffle of two words, returned with
  multiplicities.  Products of signature coefficients expand linearly over
  it, which is the engine behind reducing polynomial integrands to linear
  functionals on the signature.

Everything is a pure function of immutable values; nothing here mutates its
inputs.  Truncation levels are fixed at construction and never coerced:
mixing levels raises instead of silently truncating.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

Word = tuple[int, ...]


def word_to_index(word: Word, dim: int) -> int:
    """Flat index of ``word`` inside its level block (base-d encoding)."""
    idx = 0
    for letter in word:
        if not 1 <= letter <= dim:
            raise ValueError(f"letter {letter} outside alphabet 1..{dim}")
        idx = idx * dim + (letter - 1)
    return idx


def index_to_word(index: int, length: int, dim: int) -> Word:
    letters = []
    for _ in range(length):
        letters.append(index % dim + 1)
        index //= dim
    return tuple(reversed(letters))


def iter_words(dim: int, length: int):
    """All words of exactly ``length`` letters, in flat-index order."""
    for idx in range(dim**length):
        yield index_to_word(idx, length, dim)


@dataclass(frozen=True)
class TensorSeries:
    """Element of the tensor algebra truncated at ``level``.

    ``levels[k]`` is the flat coefficient array of the degree-k component,
    shape ``(dim**k,)``.  Instances are value objects; operations return new
    series.
    """

    dim: int
    level: int
    levels: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if len(self.levels) != self.level + 1:
            raise ValueError("levels tuple does not match truncation level")
        for k, arr in enumerate(self.levels):
            if arr.shape != (self.dim**k,):
                raise ValueError(f"level {k} has shape {arr.shape}, "
                                 f"expected ({self.dim**k},)")

    def coeff(self, word: Word) -> float:
        """Coefficient of ``word``; absent levels beyond truncation error out."""
        k = len(word)
        if k > self.level:
            raise ValueError(f"word of length {k} exceeds truncation level "
                             f"{self.level}")
        return float(self.levels[k][word_to_index(word, self.dim)])

    def scalar(self) -> float:
        return float(self.levels[0][0])

    def level_norms(self) -> np.ndarray:
        """Euclidean norm of each level block (diagnostic)."""
        return np.array([float(np.linalg.norm(arr)) for arr in self.levels])

    def max_abs(self, min_level: int = 0) -> float:
        vals = [float(np.max(np.abs(a))) if a.size else 0.0
                for a in self.levels[min_level:]]
        return max(vals) if vals else 0.0

    def __add__(self, other: "TensorSeries") -> "TensorSeries":
        _check_compatible(self, other)
        return TensorSeries(self.dim, self.level,
                            tuple(a + b for a, b in zip(self.levels, other.levels)))

    def __sub__(self, other: "TensorSeries") -> "TensorSeries":
        _check_compatible(self, other)
        return TensorSeries(self.dim, self.level,
                            tuple(a - b for a, b in zip(self.levels, other.levels)))

    def scale(self, c: float) -> "TensorSeries":
        return TensorSeries(self.dim, self.level,
                            tuple(c * a for a in self.levels))

    def allclose(self, other: "TensorSeries", rtol: float = 1e-12,
                 atol: float = 0.0) -> bool:
        _check_compatible(self, other)
        return all(np.allclose(a, b, rtol=rtol, atol=atol)
                   for a, b in zip(self.levels, other.levels))


def _check_compatible(a: TensorSeries, b: TensorSeries) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.level != b.level:
        raise ValueError(f"truncation level mismatch: {a.level} vs {b.level}")


def unit_series(dim: int, level: int) -> TensorSeries:
    """The algebra unit: empty-word coefficient 1, everything else 0."""
    levels = [np.zeros(dim**k) for k in range(level + 1)]
    levels[0][0] = 1.0
    return TensorSeries(dim, level, tuple(levels))


def from_coeffs(dim: int, level: int, coeffs: dict[Word, float]) -> TensorSeries:
    """Series with the given word -> coefficient assignment (others zero)."""
    levels = [np.zeros(dim**k) for k in range(level + 1)]
    for word, c in coeffs.items():
        k = len(word)
        if k > level:
            raise ValueError(f"word {word} longer than level {level}")
        levels[k][word_to_index(word, dim)] += c
    return TensorSeries(dim, level, tuple(levels))


def segment_signature(increment: np.ndarray, level: int) -> TensorSeries:
    """Signature of a straight segment with the given increment vector.

    The coefficient of the word (i_1, ..., i_k) is prod_j v^{i_j} / k!,
    i.e. the series is the tensor exponential of the increment.
    """
    v = np.asarray(increment, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("increment must be a 1-d vector")
    levels = [np.ones(1)]
    power = np.ones(1)
    for k in range(1, level + 1):
        power = np.multiply.outer(power, v).ravel()
        levels.append(power / factorial(k))
    return TensorSeries(v.size, level, tuple(levels))


def concat(a: TensorSeries, b: TensorSeries) -> TensorSeries:
    """Truncated tensor-concatenation product of two series.

    coeff(w) of the result is the sum of a(u) * b(v) over all splittings
    w = u v.  In flat base-d storage the degree (j, k-j) contribution is the
    outer product of the two level blocks, which is why no index juggling
    appears below.
    """
    _check_compatible(a, b)
    out = []
    for k in range(a.level + 1):
        acc = np.zeros(a.dim**k)
        for j in range(k + 1):
            acc += np.multiply.outer(a.levels[j], b.levels[k - j]).ravel()
        out.append(acc)
    return TensorSeries(a.dim, a.level, tuple(out))


@lru_cache(maxsize=65536)
def _shuffle_cached(u: Word, w: Word) -> tuple[tuple[Word, int], ...]:
    if not u:
        return ((w, 1),)
    if not w:
        return ((u, 1),)
    counts: dict[Word, int] = {}
    for word, mult in _shuffle_cached(u[:-1], w):
        counts[word + (u[-1],)] = counts.get(word + (u[-1],), 0) + mult
    for word, mult in _shuffle_cached(u, w[:-1]):
        counts[word + (w[-1],)] = counts.get(word + (w[-1],), 0) + mult
    return tuple(sorted(counts.items()))


def shuffle(u: Word, w: Word) -> dict[Word, int]:
    """Shuffle product of two words: interleavings with multiplicity.

    The multiplicities sum to binomial(|u| + |w|, |u|).
    """
    return dict(_shuffle_cached(tuple(u), tuple(w)))


def shuffle_combination(a: dict[Word, float], b: dict[Word, float]) -> dict[Word, float]:
    """Bilinear extension of the word shuffle to linear combinations."""
    out: dict[Word, float] = {}
    for u, cu in a.items():
        for w, cw in b.items():
            scale = cu * cw
            for word, mult in _shuffle_cached(u, w):
                out[word] = out.get(word, 0.0) + scale * mult
    return out
