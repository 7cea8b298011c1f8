import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import valid_params
from epcont import boundstates as bs
from epcont.oracle import fd_second_derivative
from epcont.potential import CANONICAL, ModelParams, potential_v4


def test_frozen_values():
    r = np.array([0.5, 1.0, 2.0, 5.0])
    np.testing.assert_allclose(
        bs.psi_b(CANONICAL, r),
        [-2.1448667138124757, -1.3464989531061733, -0.21309727663210268, 0.06264684373488762],
        rtol=1e-12,
    )
    np.testing.assert_allclose(
        bs.chi_b(CANONICAL, r),
        [-0.01914861441983176, -0.4947773504693351, -0.385496502476764, 0.14316343917951432],
        rtol=1e-12,
    )


def test_psi_b_first_extrema_signs():
    r = np.linspace(0.0, 10.0, 100001)
    f = bs.psi_b(CANONICAL, r)
    df = np.diff(f)
    idx = np.nonzero(np.sign(df[1:]) != np.sign(df[:-1]))[0] + 1
    assert list(np.sign(f[idx[:3]])) == [-1, 1, -1]


def test_psi_b_vanishes_at_origin_canonical():
    assert abs(bs.psi_b(CANONICAL, 0.0)) < 1e-14
    assert bs.chi_b(CANONICAL, 0.0) == pytest.approx(1.4907, abs=1e-4)


def test_psi_b_decay_exponent():
    p = CANONICAL
    r = np.linspace(20, 100, 80001)
    f = np.abs(bs.psi_b(p, r))
    edges = np.linspace(20, 100, 17)
    rs, ms = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (r >= lo) & (r < hi)
        j = np.argmax(f[m])
        rs.append(r[m][j])
        ms.append(f[m][j])
    slope = np.polyfit(np.log(rs), np.log(ms), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.1)


def test_psi_b_square_integrable():
    p = CANONICAL
    r = np.linspace(0, 200, 200001)
    f2 = bs.psi_b(p, r) ** 2
    half = r <= 100
    i100 = np.trapezoid(f2[half], r[half])
    i200 = np.trapezoid(f2, r)
    assert abs(i200 - i100) < 1e-4 * i200


def test_chi_b_bounded():
    r = np.linspace(0, 100, 100001)
    assert np.all(np.isfinite(bs.chi_b(CANONICAL, r)))
    assert np.max(np.abs(bs.chi_b(CANONICAL, r))) < 10


# -- chi_B +- -------------------------------------------------------------


def test_chi_b_pm_conjugate():
    r = np.linspace(0, 20, 201)
    plus, minus = bs.chi_b_pm(CANONICAL, r, +1), bs.chi_b_pm(CANONICAL, r, -1)
    np.testing.assert_array_equal(minus, np.conj(plus))
    np.testing.assert_allclose(plus.imag, -CANONICAL.gamma0 * bs.psi_b(CANONICAL, r))


def test_chi_b_pm_alpha_zero():
    p = ModelParams(0.0, 2.0, 1.0)
    r = np.linspace(0, 20, 201)
    np.testing.assert_array_equal(bs.chi_b_pm(p, r, +1), bs.chi_b(p, r))


def test_chi_b_pm_bad_sign():
    with pytest.raises(ValueError):
        bs.chi_b_pm(CANONICAL, 1.0, 2)


# -- Jordan block ---------------------------------------------------------


def test_block_values():
    np.testing.assert_array_equal(bs.jordan_block(CANONICAL), [[1.0, 0.0], [2.0, 1.0]])


@given(st.floats(0.01, 10.0))
def test_block_structure(q):
    p = ModelParams(1.0, 3.0, q)
    hb = bs.jordan_block(p)
    n = hb - q * q * np.eye(2)
    assert np.array_equal(n @ n, np.zeros((2, 2)))
    assert np.linalg.norm(n) > 0
    assert np.linalg.matrix_rank(n) == 1
    eta = bs.ETA
    assert np.array_equal(eta @ hb @ eta, hb.T)
    assert np.array_equal(np.linalg.inv(eta), eta)


def test_doublet_container():
    r = np.linspace(0, 10, 11)
    d = bs.jordan_doublet(CANONICAL, r)
    np.testing.assert_array_equal(d.psi_b, bs.psi_b(CANONICAL, r))
    np.testing.assert_array_equal(d.chi_b, bs.chi_b(CANONICAL, r))
    np.testing.assert_array_equal(d.h_block, bs.jordan_block(CANONICAL))
    assert d.q == 1.0


# -- chain equations ------------------------------------------------------


def test_chain_residuals_canonical():
    r1, r2, s1, s2 = bs.jordan_chain_residuals(CANONICAL)
    assert r1 <= 1e-6 * s1
    assert r2 <= 1e-6 * s2


def test_chain_residual_refinement():
    # h = 1e-3 is already at round-off; measure the stencil order above it
    coarse = bs.jordan_chain_residuals(CANONICAL, h=0.04)
    fine = bs.jordan_chain_residuals(CANONICAL, h=0.02)
    for c, f in zip(coarse[:2], fine[:2]):
        assert 12 < c / f < 20


def test_chain_residuals_reject_small_rmin():
    with pytest.raises(ValueError):
        bs.jordan_chain_residuals(CANONICAL, r_min=1e-3, h=1e-3)


@given(valid_params())
def test_chain_residuals_random(p):
    r1, r2, s1, s2 = bs.jordan_chain_residuals(p, 0.5, 30.0, 1e-3)
    assert r1 <= 1e-6 * s1
    assert r2 <= 1e-6 * s2


def test_invariant_subspace():
    # H applied to (psi_B, chi_B) reproduces the H_B action, row by row
    p = CANONICAL
    h = 1e-3
    r = np.arange(0.5 - 2 * h, 30 + 2.5 * h, h)
    psi, chi = bs.psi_b(p, r), bs.chi_b(p, r)
    v = potential_v4(p, r[2:-2])
    h_psi = -fd_second_derivative(psi, h) + v * psi[2:-2]
    h_chi = -fd_second_derivative(chi, h) + v * chi[2:-2]
    hb = bs.jordan_block(p)
    lhs = np.vstack([h_psi, h_chi])
    rhs = hb @ np.vstack([psi[2:-2], chi[2:-2]])
    scale = max(np.abs(psi).max(), np.abs(chi).max())
    assert np.max(np.abs(lhs - rhs)) <= 1e-6 * scale
