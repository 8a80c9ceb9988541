import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from silverreach.errors import (
    DegenerateSystemWarning,
    MixedClassError,
    NotMixedError,
    SingularGramianError,
    ValidationError,
)
from silverreach.gramian import (
    SetKind,
    area_factors,
    ellipse_area_geometric,
    ellipse_area_paper,
    gramian_closed_form,
    gramian_quadrature,
    min_energy_to_reach,
    mixed_set,
    reach_set,
)
from silverreach.systems import FirstOrderPair

poles = st.floats(0.05, 10)
gains = st.floats(-5, 5).filter(lambda b: abs(b) > 1e-2)


def _scipy_gramian(a1, a2, b1, b2):
    """Entrywise integral of exp(-A t) b b^T exp(-A t) on [0, inf)."""
    f = lambda rate, w: quad(lambda t: w * math.exp(-rate * t), 0, math.inf, epsabs=0, epsrel=1e-13)[0]
    return np.array(
        [[f(2 * a1, b1 * b1), f(a1 + a2, b1 * b2)], [f(a1 + a2, b1 * b2), f(2 * a2, b2 * b2)]]
    )


def test_closed_form_example_matches_scipy_quad():
    w = gramian_closed_form(FirstOrderPair(1, 2, 1, 1)).as_matrix()
    np.testing.assert_allclose(w, _scipy_gramian(1, 2, 1, 1), rtol=1e-12)
    np.testing.assert_allclose(w, [[1 / 2, 1 / 3], [1 / 3, 1 / 4]], rtol=1e-15)


def test_equal_poles_singular():
    w = gramian_closed_form(FirstOrderPair(1, 1, 1, 1))
    np.testing.assert_allclose(w.as_matrix(), [[0.5, 0.5], [0.5, 0.5]])
    assert w.det() == 0


def test_time_reversal_example():
    assert gramian_closed_form(FirstOrderPair(-1, -2, 1, 1)) == gramian_closed_form(
        FirstOrderPair(1, 2, 1, 1)
    )


@given(poles, poles, gains, gains)
def test_lyapunov_residual(a1, a2, b1, b2):
    w = gramian_closed_form(FirstOrderPair(a1, a2, b1, b2)).as_matrix()
    a = -np.diag([a1, a2])
    b = np.array([[b1], [b2]])
    residual = a @ w + w @ a.T + b @ b.T
    assert np.max(np.abs(residual)) <= 1e-12 * max(1.0, np.max(np.abs(b @ b.T)))


@given(poles, poles, gains, gains)
def test_time_reversal_property(a1, a2, b1, b2):
    fwd = gramian_closed_form(FirstOrderPair(a1, a2, b1, b2))
    rev = gramian_closed_form(FirstOrderPair(-a1, -a2, b1, b2))
    assert fwd == rev


def test_closed_form_rejects_mixed():
    with pytest.raises(MixedClassError):
        gramian_closed_form(FirstOrderPair(-1, 1, 1, 1))


@pytest.mark.parametrize(
    "pair, expected",
    [
        (FirstOrderPair(1, 2, 1, 1), [[0.5, 1 / 3], [1 / 3, 0.25]]),
        (FirstOrderPair(0.1, 0.2, 1, 1), [[5, 10 / 3], [10 / 3, 2.5]]),
        (FirstOrderPair(-1, -2, 1, 1), [[0.5, 1 / 3], [1 / 3, 0.25]]),
    ],
)
def test_quadrature_examples(pair, expected):
    w = gramian_quadrature(pair, 1e-8).as_matrix()
    np.testing.assert_allclose(w, expected, rtol=1e-8)


def test_quadrature_singular_case():
    w = gramian_quadrature(FirstOrderPair(3, 3, 1, 2), 1e-8)
    assert abs(w.det()) <= 1e-8 * w.w11 * w.w22


def test_quadrature_preconditions():
    with pytest.raises(ValidationError):
        gramian_quadrature(FirstOrderPair(1, 2, 1, 1), 1e-3)
    with pytest.raises(MixedClassError):
        gramian_quadrature(FirstOrderPair(1, -2, 1, 1), 1e-8)


def test_area_examples():
    base = ellipse_area_paper(FirstOrderPair(1, 2, 1, 1))
    assert base == pytest.approx(1 / (6 * math.sqrt(2)), rel=1e-15)
    assert base == pytest.approx(math.sqrt(1 / 72), rel=1e-15)
    assert ellipse_area_paper(FirstOrderPair(1, 2, 2, 3)) == pytest.approx(6 * base, rel=1e-15)
    assert ellipse_area_geometric(FirstOrderPair(1, 2, 1, 1)) == pytest.approx(math.pi * base)


def test_area_degenerate_is_flagged():
    with pytest.warns(DegenerateSystemWarning):
        assert ellipse_area_paper(FirstOrderPair(1, 1, 1, 1)) == 0.0


@given(poles, poles, gains, gains)
def test_area_is_sqrt_det(a1, a2, b1, b2):
    if a1 == a2:
        return
    pair = FirstOrderPair(a1, a2, b1, b2)
    area = ellipse_area_paper(pair)
    assert area == pytest.approx(math.sqrt(gramian_closed_form(pair, exact=True).det()), rel=1e-12)


@given(poles, poles, gains, gains)
def test_float_det_within_roundoff_bound(a1, a2, b1, b2):
    coupling = abs(a1 - a2) / (a1 + a2)
    if coupling < 1e-6:
        return
    pair = FirstOrderPair(a1, a2, b1, b2)
    w = gramian_closed_form(pair)
    # det = w11 w22 coupling**2, so entry rounding is amplified by 1 / coupling**2
    bound = 8 * np.finfo(float).eps / coupling**2
    assert math.sqrt(max(w.det(), 0)) == pytest.approx(ellipse_area_paper(pair), rel=bound)


def test_exact_gramian_matches_float():
    pair = FirstOrderPair(0.3, 7.5, -1.25, 2.0)
    exact = gramian_closed_form(pair, exact=True)
    flt = gramian_closed_form(pair)
    for e, f in zip((exact.w11, exact.w12, exact.w22), (flt.w11, flt.w12, flt.w22)):
        assert float(e) == pytest.approx(f, rel=1e-15)


@given(poles, poles, gains, gains, st.floats(0.1, 10))
def test_area_factors(a1, a2, b1, b2, k):
    pair = FirstOrderPair(a1, a2, b1, b2)
    f1, f2, coupling = area_factors(pair)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSystemWarning)
        assert f1 * f2 * coupling == pytest.approx(ellipse_area_paper(pair), rel=1e-12)
    assert area_factors(FirstOrderPair(k * a1, k * a2, b1, b2))[2] == pytest.approx(coupling, rel=1e-12, abs=1e-15)


@given(poles, poles.filter(lambda a: True), gains, gains)
def test_area_decreases_with_pole_scale(a1, a2, b1, b2):
    if abs(a1 - a2) < 1e-3:
        return
    areas = [ellipse_area_paper(FirstOrderPair(k * a1, k * a2, b1, b2)) for k in (0.5, 1, 2)]
    assert areas[0] > areas[1] > areas[2]


def test_mixed_set_examples():
    s = mixed_set(FirstOrderPair(-1, 1, 1, 1))
    assert s.kind is SetKind.AXIS_ALIGNED_ELLIPSE2
    np.testing.assert_allclose(s.form, np.diag([0.5, 0.5]))
    assert s.sqrt_det() == pytest.approx(0.5)
    np.testing.assert_allclose(mixed_set(FirstOrderPair(-1, 2, 1, 1)).form, np.diag([0.5, 0.25]))
    # either ordering of the stable/unstable pole
    np.testing.assert_allclose(mixed_set(FirstOrderPair(2, -1, 1, 1)).form, np.diag([0.25, 0.5]))


def test_mixed_set_dominates_same_sign():
    mixed = mixed_set(FirstOrderPair(-1, 2, 1, 1)).sqrt_det()
    same = ellipse_area_paper(FirstOrderPair(1, 2, 1, 1))
    assert mixed == pytest.approx(1 / (2 * math.sqrt(2)))
    assert mixed > same


@given(poles, poles, gains, gains)
def test_mixed_dominance_property(a1, a2, b1, b2):
    if abs(a1 - a2) < 1e-6:
        return
    mixed = mixed_set(FirstOrderPair(-a1, a2, b1, b2)).sqrt_det()
    assert mixed > ellipse_area_paper(FirstOrderPair(a1, a2, b1, b2))


def test_mixed_set_rejects_same_sign():
    with pytest.raises(NotMixedError):
        mixed_set(FirstOrderPair(1, 2, 1, 1))


def test_mixed_energy_formula():
    s = mixed_set(FirstOrderPair(-1, 2, 1, 1))
    assert s.energy([0.3, -0.7]) == pytest.approx(2 * 0.09 + 4 * 0.49)


def test_min_energy_examples():
    pair = FirstOrderPair(1, 2, 1, 1)
    assert min_energy_to_reach(pair, [0, 0]) == 0
    assert min_energy_to_reach(pair, [1 / 2, 1 / 3]) == pytest.approx(0.5, rel=1e-14)
    boundary = np.array([0.3, 0.1])
    boundary /= math.sqrt(min_energy_to_reach(pair, boundary))
    assert min_energy_to_reach(pair, boundary) == pytest.approx(1.0, rel=1e-14)
    for t in (0.2, 0.5, 3.0):
        assert min_energy_to_reach(pair, t * boundary) == pytest.approx(t * t, rel=1e-13)
    assert reach_set(pair).contains(boundary, tol=1e-12)


def test_min_energy_singular_gramian():
    pair = FirstOrderPair(1, 1, 1, 2)
    # W = b b^T / 2: only s * b is reachable, s = int exp(-t) u dt, costing 2 s**2
    energy = min_energy_to_reach(pair, [0.5, 1.0])
    assert energy == pytest.approx(2 * 0.5**2, rel=1e-12)
    with pytest.raises(SingularGramianError):
        min_energy_to_reach(pair, [1.0, 0.0])
