import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import valid_params
from epcont import jost
from epcont.boundstates import psi_b
from epcont.oracle import crum_reduced_wronskian, fd_first_derivative, fd_second_derivative
from epcont.potential import CANONICAL, ModelParams, potential_v4, w1

# group values at (1, 3, 1), k = 1.5, r = 1.3; frozen after the group sums
# were checked against the Crum determinant
U_GROUP_VALUES = {
    "constant": 28.17,
    "cos2qr": 12.184958072906431,
    "quartic": 129.3825,
    "quadratic": -518.7975,
    "cos2theta": -223.85533150576265,
    "sin2theta": 111.31306794072248,
    "sin2qr": -6.54171240841438,
    "fourth_harmonic": -29.253717551064987,
}
V_GROUP_VALUES = {
    "constant": -3.240000000000002,
    "cos2qr": -21.285116633684652,
    "cubic": 404.0400000000001,
    "linear": -152.10000000000002,
    "cos2theta": 328.1043438373405,
    "sin2theta": 112.68247299447476,
    "sin2qr": 30.713571733122837,
    "fourth_harmonic": -7.688558239537353,
}


def eval_group(kr, k, r):
    return sum(k**j * kr[j](r) for j in range(5))


# -- term groups ----------------------------------------------------------


@pytest.mark.parametrize("name", list(U_GROUP_VALUES))
def test_u_group_frozen(name):
    kr = jost.U_GROUPS[name](jost.blocks(CANONICAL))
    assert eval_group(kr, 1.5, 1.3) == pytest.approx(U_GROUP_VALUES[name], rel=1e-12, abs=1e-12)
    # u is even in k
    assert all(not kr[j].coeffs for j in (1, 3))


@pytest.mark.parametrize("name", list(V_GROUP_VALUES))
def test_v_group_frozen(name):
    kr = jost.V_GROUPS[name](jost.blocks(CANONICAL))
    assert eval_group(kr, 1.5, 1.3) == pytest.approx(V_GROUP_VALUES[name], rel=1e-12, abs=1e-12)
    # v is odd in k
    assert all(not kr[j].coeffs for j in (0, 2, 4))


@given(valid_params(), st.floats(0.0, 4.0), st.floats(0.0, 40.0))
def test_tables_match_crum_determinant(p, x, r):
    k = x * p.q
    w = jost.reduced_wronskian(p, k, r, +1)
    ref = crum_reduced_wronskian(p, k, r, +1)
    scale = w1(p, r) * (1 + k * k) ** 2
    assert abs(w - ref) <= 1e-10 * scale


# -- origin values --------------------------------------------------------


def test_origin_values_canonical():
    assert jost.u_at_origin(CANONICAL, 2.0) == pytest.approx(56.16, rel=1e-14)
    assert jost.v_at_origin(CANONICAL, 2.0) == pytest.approx(69.12, rel=1e-14)


@given(valid_params(), st.floats(0.0, 5.0))
def test_origin_dual_path(p, x):
    k = x * p.q
    full = jost.reduced_wronskian(p, k, 0.0, +1)
    closed = jost.u_at_origin(p, k) + 1j * jost.v_at_origin(p, k)
    assert abs(full - closed) <= 1e-10 * max(abs(closed), w1(p, 0.0) * (1 + k) ** 4 * 1e-3)


def test_v_vanishes_at_k_zero():
    r = np.linspace(0, 50, 501)
    assert np.all(jost.v(CANONICAL, 0.0, r) == 0.0)


# -- symmetries -----------------------------------------------------------


@given(valid_params(), st.floats(0.05, 4.0), st.floats(0.0, 40.0))
def test_conjugation_and_k_reflection(p, x, r):
    k = x * p.q
    wp = jost.reduced_wronskian(p, k, r, +1)
    wm = jost.reduced_wronskian(p, k, r, -1)
    assert wm == np.conj(wp)
    np.testing.assert_allclose(jost.reduced_wronskian(p, -k, r, -1), wp, rtol=1e-12, atol=1e-12 * abs(wp))
    np.testing.assert_allclose(
        jost.jost_unnormalized(p, -k, r, +1), jost.jost_unnormalized(p, k, r, -1), rtol=1e-12
    )


def test_jost_sample_fields():
    s = jost.jost_sample(CANONICAL, 1.5, 2.0)
    assert s.f_minus == pytest.approx(np.conj(s.f_plus))
    assert s.F_plus == pytest.approx(s.f_plus / (1.5**2 - 1) ** 2)
    at_ep = jost.jost_sample(CANONICAL, 1.0, 2.0)
    assert at_ep.F_plus is None and at_ep.F_minus is None


def test_bad_sign():
    with pytest.raises(ValueError):
        jost.reduced_wronskian(CANONICAL, 1.5, 1.0, 0)


# -- at k = q -------------------------------------------------------------


@given(valid_params())
def test_w0_is_bound_state(p):
    r = np.linspace(0, 30, 301)
    theta = p.q * r + p.delta
    w0 = np.exp(1j * theta) * jost.reduced_wronskian(p, p.q, r, +1)
    ref = 4 * p.q**2 * w1(p, r) * psi_b(p, r)
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(w0 - ref)) <= 1e-10 * scale
    np.testing.assert_allclose(np.abs(jost.reduced_wronskian(p, p.q, r, -1)), np.abs(ref), atol=1e-10 * scale)


def test_normalized_raises_at_ep():
    with pytest.raises(jost.ExceptionalPointError):
        jost.jost_normalized(CANONICAL, 1.0, 1.0)
    with pytest.raises(jost.ExceptionalPointError):
        jost.jost_normalized(CANONICAL, 1.0 + 1e-13, 1.0)
    jost.jost_normalized(CANONICAL, 1.0 + 1e-9, 1.0)


def test_double_pole_coefficient():
    p = CANONICAL
    r = np.linspace(0.0, 20.0, 41)
    eps = np.array([1e-3, 5e-4])
    for sign in (1, -1):
        vals = [(e**2) * jost.jost_normalized(p, p.q + e, r, sign) for e in eps]
        lim = 2 * vals[1] - vals[0]  # linear extrapolation to e = 0
        ref = psi_b(p, r) * np.exp(-sign * 1j * p.delta)
        assert np.max(np.abs(lim - ref)) < 1e-5 * np.max(np.abs(ref))


# -- asymptotics ----------------------------------------------------------


def test_u_quartic_asymptote():
    p = CANONICAL
    k = 2.0
    r = np.array([1e3, 1e4, 1e5])
    ratio = jost.u(p, k, r) / (16 * (k * k - p.q**2) ** 2 * (p.q * r) ** 4)
    assert np.all(np.abs(ratio - 1) < 10 / r)


def test_unit_flux_normalization():
    p = CANONICAL
    k = 1.7
    r = np.array([1e2, 1e3, 1e4])
    for sign in (1, -1):
        F = jost.jost_normalized(p, k, r, sign) * np.exp(-sign * 1j * k * r)
        assert np.all(np.abs(F - 1) < 20 / r)


# -- Wronskian ------------------------------------------------------------


def test_wronskian_closed_values():
    assert jost.wronskian_closed(ModelParams(1, 3, 1), 2.0) == -324j
    assert jost.wronskian_closed(CANONICAL, 1.0) == 0


@pytest.mark.parametrize("k", [0.3, 0.7, 1.5, 2.2, 3.0])
def test_wronskian_r_independent(k):
    p = CANONICAL
    h = 1e-3
    vals = []
    for r0 in (1.0, 5.0, 10.0, 20.0):
        r = r0 + h * np.arange(-2, 3)
        fp = jost.jost_unnormalized(p, k, r, +1)
        fm = jost.jost_unnormalized(p, k, r, -1)
        dp, dm = fd_first_derivative(fp, h)[0], fd_first_derivative(fm, h)[0]
        vals.append(fp[2] * dm - fm[2] * dp)
    ref = jost.wronskian_closed(p, k)
    for v in vals:
        assert abs(v - ref) <= 1e-7 * abs(ref)


def test_wronskian_exact_derivative_path():
    p = ModelParams(0.8, -2.5, 1.3)
    r = np.linspace(0.5, 30, 50)
    k = 2.1
    fp, fm = (jost.jost_unnormalized(p, k, r, s) for s in (1, -1))
    dp, dm = (jost.jost_unnormalized_prime(p, k, r, s) for s in (1, -1))
    ref = jost.wronskian_closed(p, k)
    np.testing.assert_allclose(fp * dm - fm * dp, ref, rtol=1e-9)


def _numerical_wronskian(p, eps, r=3.0):
    vals = []
    for e in eps:
        k = p.q + e
        fp, fm = (jost.jost_unnormalized(p, k, r, s) for s in (1, -1))
        dp, dm = (jost.jost_unnormalized_prime(p, k, r, s) for s in (1, -1))
        vals.append(abs(fp * dm - fm * dp))
    return np.array(vals)


def test_wronskian_coalescence_slope():
    p = CANONICAL
    eps = np.geomspace(1e-3, 1e-2, 12)
    slope = np.polyfit(np.log(eps), np.log(_numerical_wronskian(p, eps)), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.05)


def test_wide_window_slope_is_analytic():
    # on [1e-3, 1e-1] the k (k + q)^4 factor tilts the fit to about 4.05;
    # the numerical Wronskian reproduces the closed-form tilt exactly
    p = CANONICAL
    eps = np.geomspace(1e-3, 1e-1, 12)
    num = np.polyfit(np.log(eps), np.log(_numerical_wronskian(p, eps)), 1)[0]
    ref = np.polyfit(np.log(eps), np.log(np.abs(jost.wronskian_closed(p, p.q + eps))), 1)[0]
    assert num == pytest.approx(ref, abs=1e-4)


# -- radial equation ------------------------------------------------------


@given(valid_params(), st.sampled_from([0.3, 0.7, 1.5, 3.0]), st.sampled_from([1, -1]))
def test_jost_solves_radial_equation(p, x, sign):
    k = x * p.q
    h = 1e-3
    r = np.arange(0.5 - 2 * h, 30 + 2.5 * h, h)
    f = jost.jost_unnormalized(p, k, r, sign)
    res = -fd_second_derivative(f, h) + (potential_v4(p, r[2:-2]) - k * k) * f[2:-2]
    assert np.max(np.abs(res)) <= 1e-6 * np.max(np.abs(f))
