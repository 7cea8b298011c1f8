import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import valid_params
from epcont.potential import (
    CANONICAL,
    ModelParams,
    SingularPotentialError,
    delta,
    gammas,
    potential_v4,
    require_no_singularity,
    validate_no_singularity,
    w1,
    w1_derivatives,
    w1_poly,
)
from epcont.trigpoly import TrigPoly


def richardson(f, x, h):
    """Central first derivative with one Richardson step."""
    d = lambda s: (f(x + s) - f(x - s)) / (2 * s)
    return (4 * d(h / 2) - d(h)) / 3


# -- params ---------------------------------------------------------------


def test_params_reject_nonpositive_q():
    with pytest.raises(ValueError):
        ModelParams(1.0, 3.0, 0.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, 3.0, -1.0)


def test_params_reject_nonfinite():
    with pytest.raises(ValueError):
        ModelParams(float("nan"), 3.0, 1.0)


def test_hbar_fixed():
    assert CANONICAL.hbar == 1.0


# -- delta and gammas -----------------------------------------------------


def test_delta_canonical():
    # arctan(-2) from the Taylor series of arctan(1/2) about 0, -(pi/2 - atan(1/2))
    x = 0.5
    series = sum((-1) ** n * x ** (2 * n + 1) / (2 * n + 1) for n in range(60))
    assert delta(CANONICAL, 1.0) == pytest.approx(-(math.pi / 2 - series), abs=1e-15)
    assert delta(CANONICAL, 1.0) == pytest.approx(-1.1071487177940904, abs=1e-15)


def test_delta_trivial():
    assert delta(ModelParams(0.0, 0.0, 1.0), 5.0) == 0.0
    assert delta(ModelParams(1.0, 0.0, 1.0), 1.0) == pytest.approx(math.pi / 4)


def test_gammas_canonical():
    g0, g1, g2 = gammas(CANONICAL)
    assert (g0, g1, g2) == pytest.approx((0.2, 0.16, 0.176), abs=1e-15)


def test_gammas_alpha_zero():
    assert gammas(ModelParams(0.0, 2.0, 1.3)) == (0.0, 0.0, 0.0)


def test_gammas_at_zero_argument():
    # alpha q - beta = 0
    p = ModelParams(1.0, 0.7, 0.7)
    g0, g1, g2 = gammas(p)
    assert (g0, g1, g2) == pytest.approx((1.0, 0.0, -2.0), abs=1e-14)


@given(valid_params())
def test_gammas_are_derivatives_of_delta(p):
    f = lambda x: delta(p, x)
    d1 = lambda x: richardson(f, x, 1e-3)
    d2 = lambda x: richardson(d1, x, 1e-3)
    g0, g1, g2 = gammas(p)
    scale = 1 + abs(p.alpha) ** 3
    assert d1(p.q) == pytest.approx(g0, abs=1e-8 * scale)
    assert d2(p.q) == pytest.approx(g1, abs=1e-6 * scale)


# -- W1 -------------------------------------------------------------------


def test_w1_origin_canonical():
    assert w1(CANONICAL, 0.0) == pytest.approx(4.32, rel=1e-14)


@given(st.floats(-5, 5), st.floats(0.05, 5), st.sampled_from([-1.0, 1.0]), st.floats(0.1, 5))
def test_w1_origin_closed_form(a, b, s, q):
    p = ModelParams(a, s * b, q)
    assert w1(p, 0.0) == pytest.approx(12 * p.beta**2 / (1 + (a * q - p.beta) ** 2) ** 2, rel=1e-12)


def test_w1_quartic_growth():
    p = CANONICAL
    r = np.array([1e3, 1e4, 1e5])
    ratio = w1(p, r) / (16 * (p.q * r) ** 4)
    assert np.all(np.abs(ratio - 1) < 5 / r)


def test_w1_frozen_values():
    r = np.array([0.5, 1.0, 2.0, 5.0])
    ref = [11.504813100339772, 53.428436629071442, 433.90276247377693, 13609.357735490461]
    np.testing.assert_allclose(w1(CANONICAL, r), ref, rtol=1e-13)


@given(valid_params())
def test_w1_positive_for_valid_params(p):
    r = np.linspace(0.0, 100.0, 20001)
    assert np.all(w1(p, r) > 0)


@given(st.floats(-5, 5), st.floats(0.05, 5), st.sampled_from([-1.0, 1.0]), st.floats(0.1, 5))
def test_violation_is_a_sign_change(a, b, s, q):
    # about half of this box has a zero of W1; the reported r* must be one
    p = ModelParams(a, s * b, q)
    r_star = validate_no_singularity(p)
    if r_star is None:
        return
    eps = 1e-6 * max(1.0, r_star)
    assert w1(p, r_star + eps) <= 0 or w1(p, r_star - eps) <= 0
    r = np.linspace(0, max(r_star - eps, 0), 2000)[:-1]
    assert np.all(w1(p, r) > 0)


def test_w1_derivative_exact_vs_richardson():
    p = CANONICAL
    r = np.linspace(0.5, 30, 400)
    _, d1, _ = w1_derivatives(p, r)
    fd = richardson(lambda x: w1(p, x), r, 1e-3)
    mask = np.abs(d1) > 1e-6
    assert np.max(np.abs(fd - d1)[mask] / np.abs(d1)[mask]) < 1e-8


# -- validation -----------------------------------------------------------


def test_validate_canonical_ok():
    assert validate_no_singularity(CANONICAL) is None
    assert validate_no_singularity(ModelParams(1.0, 3.0, 2.0)) is None


def test_validate_beta_zero():
    assert validate_no_singularity(ModelParams(1.0, 0.0, 1.0)) == 0.0
    with pytest.raises(SingularPotentialError, match="W1"):
        require_no_singularity(ModelParams(0.3, 0.0, 2.0))


def test_require_reports_location():
    p = ModelParams(0.7, -1.2, 1.6)
    r_star = validate_no_singularity(p)
    assert r_star is not None and r_star > 0
    with pytest.raises(SingularPotentialError) as info:
        require_no_singularity(p)
    assert info.value.r_star == pytest.approx(r_star)


# -- V4 -------------------------------------------------------------------


def test_v4_frozen_values():
    r = np.array([0.5, 1.0, 2.0, 5.0])
    ref = [-9.121666398458748, 3.2817217269037244, 2.7430709518714766, 1.4775926890930238]
    np.testing.assert_allclose(potential_v4(CANONICAL, r), ref, rtol=1e-12)


@pytest.mark.parametrize("p", [CANONICAL, ModelParams(0.7, 1.2, 1.6), ModelParams(2.0, 1.0, 0.5)])
def test_v4_matches_finite_differences(p):
    assert validate_no_singularity(p) is None
    r = np.linspace(0.5, 30, 300)
    h = 1e-3
    f = lambda x: w1(p, x)
    d1 = richardson(f, r, h)
    d2 = lambda x, s: (f(x + s) - 2 * f(x) + f(x - s)) / s**2
    dd = (4 * d2(r, h / 2) - d2(r, h)) / 3
    w = f(r)
    v_fd = -2 * (dd * w - d1 * d1) / (w * w)
    v = potential_v4(p, r)
    assert np.max(np.abs(v_fd - v)) / np.max(np.abs(v)) < 1e-7


def test_v4_asymptote():
    p = CANONICAL
    r = np.linspace(20, 2000, 20000)
    dev = np.abs(r * potential_v4(p, r) / (8 * p.q) - np.sin(2 * (p.q * r + p.delta)))
    # envelope decay exponent from block maxima
    edges = np.geomspace(20, 2000, 9)
    rs, ms = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (r >= lo) & (r < hi)
        rs.append(np.sqrt(lo * hi))
        ms.append(dev[m].max())
    slope = np.polyfit(np.log(rs), np.log(ms), 1)[0]
    assert slope <= -0.9
    assert np.max(dev * r) < 1e3  # C finite


def test_v4_first_extrema_signs():
    r = np.linspace(0.0, 10.0, 100001)
    v = potential_v4(CANONICAL, r)
    dv = np.diff(v)
    idx = np.nonzero(np.sign(dv[1:]) != np.sign(dv[:-1]))[0] + 1
    first = v[idx[:3]]
    assert list(np.sign(first)) == [-1, 1, -1]
    np.testing.assert_allclose(r[idx[:3]], [0.489, 1.27, 3.07], atol=0.01)


# -- TrigPoly -------------------------------------------------------------


def test_trigpoly_term_phase_folding():
    f = TrigPoly.term(2.0, 3.0, power=1, kind="cos", harmonic=1, phase=0.4)
    r = np.linspace(0, 5, 11)
    np.testing.assert_allclose(f(r), 3 * r * np.cos(2 * r + 0.4), atol=1e-13)


def test_trigpoly_algebra():
    om = 1.3
    a = TrigPoly.term(om, 1.5, power=2, kind="sin", harmonic=1)
    b = TrigPoly.term(om, -0.5, power=1, kind="cos", harmonic=2) + TrigPoly.constant(om, 2.0)
    r = np.linspace(0, 4, 41)
    fa, fb = a(r), b(r)
    np.testing.assert_allclose((a * b)(r), fa * fb, atol=1e-12)
    np.testing.assert_allclose((a - b)(r), fa - fb, atol=1e-12)
    np.testing.assert_allclose((b**3)(r), fb**3, atol=1e-10)


def test_trigpoly_derivative_exact():
    om = 0.8
    f = TrigPoly.term(om, 1.0, power=3, kind="cos", harmonic=2) * TrigPoly.monomial(om, 2.0, 1)
    r = np.linspace(0.5, 3, 21)
    exact = lambda x: 2 * x**4 * np.cos(1.6 * x)
    d1 = lambda x: 8 * x**3 * np.cos(1.6 * x) - 3.2 * x**4 * np.sin(1.6 * x)
    np.testing.assert_allclose(f(r), exact(r), rtol=1e-13)
    np.testing.assert_allclose(f.derivative()(r), d1(r), rtol=1e-12, atol=1e-12)


def test_trigpoly_rejects_mixed_frequencies():
    with pytest.raises(ValueError):
        TrigPoly.constant(1.0, 1.0) + TrigPoly.constant(2.0, 1.0)


def test_w1_poly_is_cached_structure():
    p = w1_poly(CANONICAL)
    assert p.degree == 4
    assert p.omega == pytest.approx(CANONICAL.q)
