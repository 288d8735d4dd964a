"""Differential one-forms, iterated integrals along them, and the shuffle
reduction of polynomial one-forms to linear functionals on the signature.

A one-form phi = sum_i phi_i dx^i is integrated along a piecewise-linear
path x as integral of sum_i phi_i(x_t) xdot_t^i dt.  Iterated integrals of a
sequence of one-forms (here called extended signatures of the path) are
computed by the nested quadrature engine in :mod:`pathsig.quadrature`.

For polynomial one-forms the iterated integral is also a linear functional
of the truncated signature: a monomial in the path position expands into
signature coefficients through the shuffle product (a product of signature
coordinates is the signature of the shuffle), and appending "... dx^j"
right-concatenates the letter j to every word.  ``polynomial_functional``
builds that functional explicitly; agreement with the quadrature route is
the library's main cross-check of both.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .quadrature import build_grid, nested_value, segment_pieces
from .tensor import TensorSeries, Word, shuffle_combination


def mollifier(t) -> np.ndarray | float:
    """The standard bump h(t) = exp(-1 / (1 - t^2)) on (-1, 1), else 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out if out.ndim else float(out)


def mollifier_derivative(t) -> np.ndarray | float:
    """h'(t) = h(t) * (-2t / (1 - t^2)^2); nonzero on (-1, 1) except t = 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti**2)) * (-2.0 * ti / (1.0 - ti**2) ** 2)
    return out if out.ndim else float(out)


class OneForm:
    """Base class: d scalar components with optional compact support box."""

    dim: int
    support: tuple[np.ndarray, np.ndarray] | None

    def components(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate all components at pts of shape (N, d); returns (N, d)."""
        raise NotImplementedError

    def component_gradient(self, j: int, pts: np.ndarray) -> np.ndarray:
        """First partials of component j (1-based) at pts; returns (N, d)."""
        raise NotImplementedError

    def sup_norm_bound(self) -> float:
        """Upper bound for max_i sup |phi_i| (used for reporting only)."""
        raise NotImplementedError


@dataclass(frozen=True)
class BumpOneForm(OneForm):
    """The mollifier-built form supported on the closed cube of half-width eta.

    Only the first component is nonzero:

        phi_1(x) = prod_i h((x^i - c^i) / eta) * exp(h^2((x^2 - c^2) / eta))

    It vanishes on the cube boundary, and d(phi_1)/d(x^2) is nonzero
    everywhere inside the open cube except on the slice x^2 = c^2, which is
    the nondegeneracy that makes single integrals along visited cubes
    almost surely nonzero.
    """

    center: np.ndarray
    eta: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if c.size < 2:
            raise ValueError("the bump construction needs dimension >= 2")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        object.__setattr__(self, "center", c)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def support(self):
        return self.center - self.eta, self.center + self.eta

    def _factors(self, pts: np.ndarray):
        u = (pts - self.center) / self.eta
        hs = mollifier(u)
        e = np.exp(mollifier(u[:, 1]) ** 2)
        return u, hs, e

    def first_component(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        _, hs, e = self._factors(pts)
        return np.prod(hs, axis=1) * e

    def log_first_component(self, pts: np.ndarray) -> np.ndarray:
        """log phi_1 directly in log space (-inf outside the open cube).

        phi_1 decays like exp(-1/u) in the distance u to the boundary, far
        below float range for shallow excursions; the log stays finite for
        any point strictly inside the cube, which downstream zero tests
        rely on.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        u = (pts - self.center) / self.eta
        out = np.full(pts.shape[0], -np.inf)
        inside = np.all(np.abs(u) < 1.0, axis=1)
        ui = u[inside]
        out[inside] = (np.sum(-1.0 / (1.0 - ui**2), axis=1)
                       + mollifier(ui[:, 1]) ** 2)
        return out

    def components(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros_like(pts)
        out[:, 0] = self.first_component(pts)
        return out

    def component_gradient(self, j: int, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if j != 1:
            return np.zeros_like(pts)
        u, hs, e = self._factors(pts)
        grad = np.zeros_like(pts)
        hprime = mollifier_derivative(u)
        for k in range(self.dim):
            others = np.prod(np.delete(hs, k, axis=1), axis=1)
            g = others * hprime[:, k] * e / self.eta
            if k == 1:
                g = g * (1.0 + 2.0 * hs[:, 1] ** 2)
            grad[:, k] = g
        return grad

    def sup_norm_bound(self) -> float:
        h0 = float(mollifier(0.0))
        return h0**self.dim * float(np.exp(h0**2))


@dataclass(frozen=True)
class FunctionOneForm(OneForm):
    """One-form from explicit component callables (mostly for tests).

    Each callable maps (N, d) points to (N,) values and must vanish outside
    the support box when one is declared.
    """

    dim: int
    funcs: tuple
    support: tuple[np.ndarray, np.ndarray] | None = None

    def components(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros_like(pts)
        for i, f in enumerate(self.funcs):
            if f is not None:
                out[:, i] = f(pts)
        return out


@dataclass(frozen=True)
class Monomial:
    """One term c * x^alpha dx^j with a multi-index alpha (1-based j)."""

    coeff: float
    alpha: tuple[int, ...]
    j: int

    def degree(self) -> int:
        return sum(self.alpha)


@dataclass(frozen=True)
class PolynomialOneForm(OneForm):
    """Finite sum of monomial one-forms; supported on all of R^d."""

    dim: int
    terms: tuple[Monomial, ...]
    support = None

    def __post_init__(self):
        for term in self.terms:
            if len(term.alpha) != self.dim:
                raise ValueError("multi-index length must equal dim")
            if not 1 <= term.j <= self.dim:
                raise ValueError(f"component index {term.j} outside 1..{self.dim}")

    def components(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros_like(pts)
        for term in self.terms:
            vals = np.full(pts.shape[0], term.coeff)
            for axis, power in enumerate(term.alpha):
                if power:
                    vals = vals * pts[:, axis] ** power
            out[:, term.j - 1] += vals
        return out

    def max_degree(self) -> int:
        return max((t.degree() for t in self.terms), default=0)

    def to_json(self) -> list[dict]:
        return [{"coeff": t.coeff, "alpha": list(t.alpha), "j": t.j}
                for t in self.terms]

    @staticmethod
    def from_json(dim: int, data: list[dict]) -> "PolynomialOneForm":
        terms = tuple(Monomial(float(d["coeff"]), tuple(int(a) for a in d["alpha"]),
                               int(d["j"])) for d in data)
        return PolynomialOneForm(dim, terms)


def bump_one_form(center, eta: float) -> BumpOneForm:
    """Bump form for the open cube with the given center and half-width."""
    return BumpOneForm(np.asarray(center, dtype=float), float(eta))


def coordinate_one_form(dim: int, j: int) -> PolynomialOneForm:
    """The constant form dx^j."""
    return PolynomialOneForm(dim, (Monomial(1.0, (0,) * dim, j),))


def save_polynomial_forms(forms, file: str | Path) -> None:
    payload = {"dim": forms[0].dim, "forms": [f.to_json() for f in forms]}
    with open(file, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_polynomial_forms(file: str | Path) -> list[PolynomialOneForm]:
    with open(file) as fh:
        payload = json.load(fh)
    return [PolynomialOneForm.from_json(payload["dim"], data)
            for data in payload["forms"]]


def extended_signature(path, forms, interval: tuple[float, float] = (0.0, 1.0),
                       refine: int = 64) -> float:
    """Iterated integral of the path along a sequence of one-forms.

    Computed over s < s_1 < ... < s_n < t by maintaining the running inner
    integral on a Simpson refinement of the path's knots (``refine``
    sub-steps per segment, even).  Integrands are smooth along linear
    segments, so composite Simpson converges at fourth order.
    """
    forms = list(forms)
    if not forms:
        raise ValueError("need at least one one-form")
    for f in forms:
        if f.dim != path.dim:
            raise ValueError("one-form dimension does not match path")
    if refine < 2 or refine % 2:
        raise ValueError("refine must be an even integer >= 2")
    pieces = segment_pieces(path, interval[0], interval[1])
    grid = build_grid(path, pieces, panels=refine // 2)
    flat_pts = grid.points.reshape(-1, path.dim)
    weights = []
    for f in forms:
        comps = f.components(flat_pts).reshape(grid.points.shape)
        weights.append(np.einsum("rmi,ri->rm", comps, grid.slopes))
    return nested_value(grid, weights).value


@dataclass(frozen=True)
class LinearFunctional:
    """Finite linear functional on truncated tensor series: word -> weight."""

    dim: int
    level: int
    coeffs: dict

    def __post_init__(self):
        for word in self.coeffs:
            if len(word) > self.level:
                raise ValueError(f"word {word} exceeds level {self.level}")

    def __call__(self, series: TensorSeries) -> float:
        if series.dim != self.dim:
            raise ValueError("dimension mismatch")
        if series.level < self.level:
            raise ValueError(f"series truncated at {series.level}, functional "
                             f"needs level {self.level}")
        return float(sum(c * series.coeff(w) for w, c in self.coeffs.items()))


def required_level(forms) -> int:
    """Minimal truncation level on which the functional of ``forms`` lives."""
    return sum(1 + f.max_degree() for f in forms)


def polynomial_functional(forms, level_budget: int) -> LinearFunctional:
    """Linear functional f with f(S(x)_{0,1}) equal to the iterated integral
    of x along the polynomial one-forms, for every path x with x_0 = 0.

    Construction, innermost form first: the running integral after k forms
    is a combination of signature coordinates t -> S(x)_{0,t}(w).  A factor
    x_t^alpha multiplies it by level-1 coordinates, i.e. shuffles the words
    with alpha's letters; the trailing dx^j appends the letter j.
    """
    forms = list(forms)
    if not forms:
        raise ValueError("need at least one one-form")
    dim = forms[0].dim
    needed = required_level(forms)
    if level_budget < needed:
        raise ValueError(f"level budget {level_budget} too small; the form "
                         f"sequence needs level {needed}")
    running: dict[Word, float] = {(): 1.0}
    for form in forms:
        nxt: dict[Word, float] = {}
        for term in form.terms:
            expanded = shuffle_combination(_monomial_words(term.alpha), running)
            for word, c in expanded.items():
                key = word + (term.j,)
                nxt[key] = nxt.get(key, 0.0) + term.coeff * c
        running = nxt
    return LinearFunctional(dim, level_budget, running)


def _monomial_words(alpha: tuple[int, ...]) -> dict[Word, float]:
    """x^alpha as a shuffle polynomial in single-letter words."""
    out: dict[Word, float] = {(): 1.0}
    for axis, power in enumerate(alpha):
        for _ in range(power):
            out = shuffle_combination(out, {(axis + 1,): 1.0})
    return out
