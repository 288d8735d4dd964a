import math

import numpy as np
import pytest

from pathsig.one_forms import (BumpOneForm, FunctionOneForm, LinearFunctional,
                               Monomial, PolynomialOneForm, bump_one_form,
                               coordinate_one_form, extended_signature,
                               load_polynomial_forms, mollifier,
                               mollifier_derivative, polynomial_functional,
                               required_level, save_polynomial_forms)
from pathsig.paths import from_points, path_signature, reparametrize
from pathsig.tensor import from_coeffs

from conftest import (central_difference, random_path,
                      random_reparametrization, riemann_extended_signature)


def test_mollifier_values():
    assert mollifier(0.0) == pytest.approx(math.exp(-1.0))
    assert mollifier(0.5) == pytest.approx(math.exp(-4.0 / 3.0))
    assert mollifier(1.0) == 0.0
    assert mollifier(-1.0) == 0.0
    assert mollifier(3.7) == 0.0
    out = mollifier(np.array([-2.0, 0.0, 0.99999, 2.0]))
    assert out[0] == 0.0 and out[3] == 0.0 and out[1] > out[2] >= 0.0


def test_mollifier_derivative_sign_structure():
    ts = np.linspace(-0.99, 0.99, 101)
    dv = mollifier_derivative(ts)
    assert np.all(dv[ts < 0] > 0)
    assert np.all(dv[ts > 0] < 0)
    assert mollifier_derivative(0.0) == 0.0
    # matches finite differences of the mollifier
    for t in (-0.7, -0.2, 0.3, 0.8):
        fd = (mollifier(t + 1e-6) - mollifier(t - 1e-6)) / 2e-6
        assert mollifier_derivative(t) == pytest.approx(fd, rel=1e-6)


def test_bump_value_at_center_and_boundary():
    d = 3
    form = bump_one_form(np.zeros(d), 0.5)
    val = form.first_component(np.zeros((1, d)))[0]
    assert val == pytest.approx(math.exp(-d) * math.exp(math.exp(-2.0)))
    # vanishes on faces and corners of the cube
    corners = 0.5 * np.array([[1, 1, 1], [-1, 1, -1], [1, 0, 0], [0, -1, 0.3]])
    assert np.all(form.components(corners) == 0.0)
    # only the first component is ever nonzero
    inside = np.array([[0.1, -0.2, 0.05]])
    comps = form.components(inside)
    assert comps[0, 0] > 0 and np.all(comps[0, 1:] == 0.0)


def test_bump_requires_two_dims():
    with pytest.raises(ValueError):
        bump_one_form(np.zeros(1), 0.5)
    with pytest.raises(ValueError):
        bump_one_form(np.zeros(2), -1.0)


def test_bump_gradient_matches_finite_differences(rng):
    center = rng.normal(size=2)
    eta = 0.4
    form = bump_one_form(center, eta)
    for _ in range(30):
        x = center + rng.uniform(-0.95, 0.95, size=2) * eta
        grad = form.component_gradient(1, x[None, :])[0]
        for axis in range(2):
            fd = central_difference(
                lambda p: form.first_component(p[None, :])[0], x, axis,
                1e-6 * eta)
            assert grad[axis] == pytest.approx(fd, rel=5e-4, abs=1e-12)


def test_bump_slice_nondegeneracy(rng):
    center = np.array([0.3, -0.6])
    eta = 0.25
    form = bump_one_form(center, eta)
    pts = center + rng.uniform(-0.95, 0.95, size=(100, 2)) * eta
    off_slice = np.abs(pts[:, 1] - center[1]) > 1e-3 * eta
    grad2 = form.component_gradient(1, pts)[:, 1]
    assert np.all(np.abs(grad2[off_slice]) > 0)
    # sign flips across the slice x2 = center2
    assert np.all(np.sign(grad2[off_slice]) == np.sign(center[1] - pts[off_slice, 1]))


def test_log_first_component_consistent():
    form = bump_one_form(np.array([0.0, 0.0]), 1.0)
    pts = np.array([[0.1, 0.2], [0.8, -0.5], [1.5, 0.0], [0.999999, 0.0]])
    logs = form.log_first_component(pts)
    vals = form.first_component(pts)
    assert logs[2] == -np.inf and vals[2] == 0.0
    np.testing.assert_allclose(np.exp(logs[:2]), vals[:2], rtol=1e-12)
    # near the face the log stays finite long after the value underflows
    shallow = np.array([[1.0 - 1e-9, 0.0]])
    assert form.first_component(shallow)[0] == 0.0
    assert form.log_first_component(shallow)[0] < -1e8
    assert np.isfinite(form.log_first_component(shallow)[0])


def test_extended_signature_level1_increment(rng):
    path = random_path(rng, 2, 6)
    box = (np.full(2, -10.0), np.full(2, 10.0))
    form = FunctionOneForm(2, (lambda p: np.ones(p.shape[0]), None), box)
    val = extended_signature(path, [form])
    assert val == pytest.approx(path.points[-1, 0] - path.points[0, 0], abs=1e-12)


def test_extended_signature_matches_tensor_level2(l_path):
    forms = [coordinate_one_form(2, 1), coordinate_one_form(2, 2)]
    assert extended_signature(l_path, forms) == pytest.approx(1.0, abs=1e-12)
    sig = path_signature(l_path, 2)
    assert sig.coeff((1, 2)) == pytest.approx(1.0)


def test_extended_signature_vanishing_support(rng):
    path = random_path(rng, 2, 5)  # stays inside [-1, 1]^2
    far = bump_one_form(np.array([50.0, 50.0]), 0.5)
    near = coordinate_one_form(2, 1)
    assert extended_signature(path, [near, far]) == 0.0


def test_extended_signature_interval_and_locality(rng):
    path = random_path(rng, 2, 7)
    form = PolynomialOneForm(2, (Monomial(1.0, (1, 0), 2),))
    whole = extended_signature(path, [form], interval=(0.0, 1.0))
    s, t = 0.25, 0.8
    part = extended_signature(path, [form], interval=(s, t))
    oracle = riemann_extended_signature(path, [form], steps=40000,
                                        t_lo=s, t_hi=t)
    assert part == pytest.approx(oracle, rel=1e-5, abs=1e-8)
    assert part != pytest.approx(whole, rel=1e-3)


def test_extended_signature_against_riemann_oracle(rng):
    for _ in range(3):
        path = random_path(rng, 2, 6)
        forms = [PolynomialOneForm(2, (Monomial(0.7, (1, 0), 2),
                                       Monomial(-0.3, (0, 0), 1))),
                 PolynomialOneForm(2, (Monomial(1.0, (0, 1), 1),))]
        val = extended_signature(path, forms)
        oracle = riemann_extended_signature(path, forms, steps=30000)
        assert val == pytest.approx(oracle, rel=2e-4, abs=1e-8)


def test_extended_signature_validation(rng):
    path = random_path(rng, 2, 5)
    with pytest.raises(ValueError):
        extended_signature(path, [])
    with pytest.raises(ValueError):
        extended_signature(path, [coordinate_one_form(3, 1)])
    with pytest.raises(ValueError):
        extended_signature(path, [coordinate_one_form(2, 1)], refine=3)


def test_polynomial_functional_single_letters():
    f = polynomial_functional([coordinate_one_form(2, 1)], 1)
    assert f.coeffs == {(1,): 1.0}
    g = polynomial_functional([coordinate_one_form(2, 1),
                               coordinate_one_form(2, 2)], 2)
    assert g.coeffs == {(1, 2): 1.0}


def test_polynomial_functional_x1_dx2(rng):
    form = PolynomialOneForm(2, (Monomial(1.0, (1, 0), 2),))
    f = polynomial_functional([form], 2)
    assert f.coeffs == {(1, 2): 1.0}
    for _ in range(20):
        path = random_path(rng, 2, 6)
        lhs = f(path_signature(path, 2))
        rhs = extended_signature(path, [form])
        assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-12)


def test_polynomial_functional_budget_error():
    form = PolynomialOneForm(2, (Monomial(1.0, (2, 1), 1),))  # degree 3
    with pytest.raises(ValueError, match="level"):
        polynomial_functional([form, form], 5)
    assert required_level([form, form]) == 8


def test_polynomial_functional_oracle_equivalence(rng):
    # the computable content of "signature determines extended signatures"
    forms = [PolynomialOneForm(2, (Monomial(0.5, (2, 0), 2),)),
             PolynomialOneForm(2, (Monomial(1.0, (0, 1), 1),
                                   Monomial(-2.0, (1, 1), 2),)),
             coordinate_one_form(2, 1)]
    level = required_level(forms)
    f = polynomial_functional(forms, level)
    for _ in range(5):
        path = random_path(rng, 2, 5)
        lhs = f(path_signature(path, level))
        rhs = extended_signature(path, forms, refine=256)
        assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-10)


def test_signature_determines_extended_signature(rng):
    # a path and its exact reparametrization share all polynomial
    # extended signatures
    forms = [PolynomialOneForm(2, (Monomial(1.0, (1, 0), 2),)),
             coordinate_one_form(2, 1)]
    path = random_path(rng, 2, 6)
    other = reparametrize(path, random_reparametrization(rng))
    a = extended_signature(path, forms)
    b = extended_signature(other, forms)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def test_linear_functional_contract():
    f = LinearFunctional(2, 2, {(1, 2): 2.0})
    s = from_coeffs(2, 2, {(): 1.0, (1, 2): 0.25})
    assert f(s) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        f(from_coeffs(2, 1, {(): 1.0}))
    with pytest.raises(ValueError):
        LinearFunctional(2, 1, {(1, 2): 1.0})


def test_polynomial_form_json_roundtrip(tmp_path):
    forms = [PolynomialOneForm(2, (Monomial(0.5, (2, 0), 2),
                                   Monomial(-1.0, (0, 0), 1))),
             coordinate_one_form(2, 2)]
    file = tmp_path / "forms.json"
    save_polynomial_forms(forms, file)
    back = load_polynomial_forms(file)
    assert back == forms
