"""S-matrix, phase shift and the regular/irregular scattering solutions.

Near the exceptional point k = q the reduced Wronskians are expanded in
powers of eps = k - q,

    w^{+-}(k, r) = e^{-+ i theta(r)} sum_l w_l^{+-}(q, r) eps**l,
    theta(r) = q r + delta(q),

and the regular solution is evaluated from that expansion so that the
removable 0/0 at k = q never has to be formed numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .boundstates import chi_b, chi_b_pm, psi_b
from .jost import (
    ExceptionalPointError,
    jost_normalized,
    reduced_wronskian,
    u_table,
    v_table,
)
from .potential import ModelParams, gammas, w1

__all__ = [
    "SpectralSingularity",
    "EPS_SWITCH",
    "s_matrix",
    "big_delta",
    "big_delta_principal",
    "ExpansionCoeffs",
    "expansion_coeffs",
    "taylor_coeffs",
    "continued_coeffs",
    "zeta",
    "psi_regular",
    "psi_irregular",
    "eps_switch",
    "POLE_WINDOW",
    "irregular_residue",
    "SingularDecomposition",
    "jost_singular_decomposition",
    "ScatteringRecord",
    "scattering_record",
    "scattering_sweep",
]

# Branch switch for psi_s, in units of q.  The Wronskian form loses about
# 1e-16/|k-q|^4 to cancellation (psi_s vanishes to second order for generic
# parameters), so at 1e-2 q it is still good to ~1e-8 while the series is exact.
EPS_SWITCH = 1e-2
# psi_is is refused within this distance of q (units of q): genuine double pole.
POLE_WINDOW = 1e-3
_SING_TOL = 1e-12


class SpectralSingularity(ArithmeticError):
    """w+(k, 0) vanishes at a real wave number: the Jost function has a real zero."""


def eps_switch(params: ModelParams) -> float:
    return EPS_SWITCH * params.q


# -- S-matrix and phase shift ---------------------------------------------


def _origin_coeffs(params: ModelParams):
    """k-power coefficients of u(k, 0) and v(k, 0)."""
    uc = np.array([c(0.0) for c in u_table(params)], dtype=float)
    vc = np.array([c(0.0) for c in v_table(params)], dtype=float)
    return uc, vc


def _origin_poly(params: ModelParams):
    """Coefficients (low to high) of w+(k, 0) with any zeros at k = +-q divided out.

    When psi_B(q, 0) = 0 both u(k, 0) and v(k, 0) vanish at k = +-q (for
    instance beta = 3 alpha q).  The common real factor cancels in S = w-/w+,
    so it is removed before S or Delta are formed.
    """
    uc, vc = _origin_coeffs(params)
    c = uc + 1j * vc
    q = params.q
    for root in (q, -q):
        val = np.polyval(c[::-1], root)
        scale = np.abs(c) @ (abs(root) ** np.arange(c.size))
        if c.size > 1 and abs(val) <= _SING_TOL * scale:
            quot, _ = np.polydiv(c[::-1], np.array([1.0, -root]))
            c = quot[::-1]
    return c


def _jost_origin(params: ModelParams, k):
    """(g(k), scale) for the deflated w+(k, 0); scale sums the magnitudes of its terms."""
    c = _origin_poly(params)
    k = np.asarray(k, dtype=float)
    powers = k[..., None] ** np.arange(c.size)
    return powers @ c, np.abs(powers) @ np.abs(c)


def s_matrix(params: ModelParams, k):
    """S(k) = w-(k, 0)/w+(k, 0) = (u - i v)/(u + i v) at r = 0.

    Zeros of w+(k, 0) at k = +-q, when present, are shared by w-(k, 0) and
    are cancelled, so S stays finite through the exceptional points.

    Raises
    ------
    SpectralSingularity
        If ``|w+(k, 0)| < 1e-12`` times the size of its terms at any other k.
    """
    w, scale = _jost_origin(params, k)
    bad = np.abs(w) < _SING_TOL * scale
    if np.any(bad):
        kb = np.asarray(k, dtype=float)[bad] if np.ndim(k) else k
        raise SpectralSingularity(f"w+(k, 0) vanishes at real k = {kb}")
    s = np.conj(w) / w
    return s if s.ndim else complex(s)


def big_delta_principal(params: ModelParams, k):
    """Principal-branch phase shift -arctan(v(k, 0)/u(k, 0)), in [-pi/2, pi/2]."""
    k = np.asarray(k, dtype=float)
    uu = np.asarray(sum(k**j * c(0.0) for j, c in enumerate(u_table(params))), dtype=float)
    vv = np.asarray(sum(k**j * c(0.0) for j, c in enumerate(v_table(params))), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.arctan(vv / uu)
    out = np.where(uu == 0.0, -math.pi / 2 * np.sign(vv), out)
    return out if out.ndim else float(out)


def big_delta(params: ModelParams, k):
    """Phase shift Delta(k), continuous in k with Delta(0) = 0.

    The deflated w+(k, 0) is a polynomial ``c_n prod_m (k - z_m)``, so
    ``arg w+ = arg c_n + sum_m arg(k - z_m)`` and every term is continuous on
    the real axis when no root is real.  Delta = -(arg w+(k, 0) - arg w+(0, 0))
    and S = exp(2 i Delta).
    """
    c = _origin_poly(params)
    nz = np.nonzero(np.abs(c) > 0)[0]
    roots = np.roots(c[: int(nz.max()) + 1][::-1])
    k = np.asarray(k, dtype=float)
    phase = np.sum(np.angle(k[..., None] - roots) - np.angle(-roots), axis=-1)
    out = -phase
    return out if out.ndim else float(out)


# -- expansion about the exceptional point --------------------------------


@dataclass(frozen=True)
class ExpansionCoeffs:
    """Coefficients w_l^{+-}(q, r), l = 0..4, of the expansion in (k - q).

    ``w_plus[l]`` and ``w_minus[l]`` are arrays shaped like ``r``.
    """

    q: float
    theta: np.ndarray
    w_plus: np.ndarray
    w_minus: np.ndarray

    @property
    def w0(self) -> np.ndarray:
        return self.w_plus[0].real

    def reconstruct(self, k, sign: int = +1):
        """w^{sign}(k, r) rebuilt from the five coefficients.

        About k = -q time reversal swaps the roles of the two families:
        w^{+-}(k, r) = e^{+- i theta} sum_l w_l^{-+}(-q, r) (k + q)**l.
        """
        if self.q > 0:
            c = self.w_plus if sign > 0 else self.w_minus
            phase = np.exp(-sign * 1j * self.theta)
        else:
            c = self.w_minus if sign > 0 else self.w_plus
            phase = np.exp(sign * 1j * self.theta)
        eps = k - self.q
        return phase * sum(c[l] * eps**l for l in range(5))

    def continued(self) -> "ExpansionCoeffs":
        """Coefficients at -q: w_l^{+-}(-q, r) = (-1)^l w_l^{+-}(q, r)."""
        flip = np.array([(-1) ** l for l in range(5)]).reshape((5,) + (1,) * self.theta.ndim)
        return ExpansionCoeffs(-self.q, self.theta, flip * self.w_plus, flip * self.w_minus)


def expansion_coeffs(params: ModelParams, r) -> ExpansionCoeffs:
    """Closed forms of w_0 .. w_4 in terms of psi_B, chi_B, W1 and theta.

    w_0 .. w_2 are the standard expressions.  For l = 3, 4 the coefficients
    follow from the top two k-powers of w (k**4 W1 and +- i k**3 v_3(r)).
    """
    r = np.asarray(r, dtype=float)
    q = params.q
    _, g1, g2 = gammas(params)
    g = r + params.gamma0
    th = q * r + params.delta
    s, c = np.sin(th), np.cos(th)
    W = w1(params, r)
    pb, cb = psi_b(params, r), chi_b(params, r)

    w0 = 4 * q**2 * W * pb
    w1_re = 4 * q * W * (pb + q * cb)
    w1_im = -4 * q**2 * W * g * pb
    w2_re = (
        -2 * W * pb * c**2
        + 6 * q * W * cb
        + 16 * q**2 * (4 * q**4 * g**4 - 3 * q**2 * g**2 - 3 * q**4 * g1**2 + 2 * q**4 * g * g2 + 3 * s**2 * c**2) * c
    )
    w2_im = -2 * W * ((2 * q * g + q**2 * g1) * pb + 2 * q**2 * g * cb)
    w3_re = 4 * q * W
    w3_im = v_table(params)[3](r)
    eith = np.exp(1j * th)

    def pair(re, im):
        return re + 1j * im, re - 1j * im

    p0, m0 = pair(w0, 0 * w0)
    p1, m1 = pair(w1_re, w1_im)
    p2, m2 = pair(w2_re, w2_im)
    p3, m3 = eith * w3_re + 1j * eith * w3_im, np.conj(eith) * w3_re - 1j * np.conj(eith) * w3_im
    p4, m4 = W * eith, W * np.conj(eith)
    return ExpansionCoeffs(q, th, np.array([p0, p1, p2, p3, p4]), np.array([m0, m1, m2, m3, m4]))


def taylor_coeffs(params: ModelParams, r, center: float, sign: int = +1) -> np.ndarray:
    """Taylor coefficients of w^{sign}(k, r) about k = ``center``.

    Computed directly from the k-power tables of u and v; shape (5,) + r.shape.
    """
    r = np.asarray(r, dtype=float)
    cn = [ut(r) + sign * 1j * vt(r) for ut, vt in zip(u_table(params), v_table(params))]
    out = []
    for l in range(5):
        out.append(sum(math.comb(n, l) * center ** (n - l) * cn[n] for n in range(l, 5)))
    return np.array(out)


def continued_coeffs(params: ModelParams, r) -> ExpansionCoeffs:
    """Coefficients about k = -q obtained by continuation.

    Time reversal gives w^{-+}(k, r) = w^{+-}(-k, r), so the Taylor
    coefficients of e^{+- i theta} w^{-+}(k, r) about k = -q play the role of
    w_l^{+-}(-q, r).
    """
    r = np.asarray(r, dtype=float)
    th = params.q * r + params.delta
    plus = np.exp(1j * th) * taylor_coeffs(params, r, -params.q, -1)
    minus = np.exp(-1j * th) * taylor_coeffs(params, r, -params.q, +1)
    return ExpansionCoeffs(-params.q, th, plus, minus)


def _bracket_coeffs(params: ModelParams, r):
    """A_l(r) = sum_m w+_{l-m}(q, 0) w-_m(q, r) for l = 0..8."""
    at0 = expansion_coeffs(params, 0.0).w_plus
    atr = expansion_coeffs(params, r).w_minus
    A = []
    for l in range(9):
        A.append(sum(at0[l - m] * atr[m] for m in range(max(0, l - 4), min(l, 4) + 1)))
    return A


def zeta(params: ModelParams, r, order: int, *, extra_r: bool = False, return_scale: bool = False):
    """zeta_0, zeta_1 or zeta_2: the eps**order coefficient of the bracket.

    The bracket is w+(k,0) w-(k,r) e^{-ikr} minus its complex conjugate,
    expanded about k = q with e^{-i(k-q)r} = 1 - i eps r - eps**2 r**2/2 ...

    ``extra_r=True`` gives a variant of zeta_2 that carries an extra
    factor r on the w_2+(q,0) w_0-(q,r) product; that variant does not
    vanish and is kept only for comparison.  With ``return_scale`` the sum
    of the magnitudes of the constituent products is returned as well.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order!r}")
    r = np.asarray(r, dtype=float)
    at0 = expansion_coeffs(params, 0.0).w_plus
    atr = expansion_coeffs(params, r).w_minus
    terms = []
    for l in range(order + 1):
        for m in range(order + 1 - l):
            j = order - l - m
            fac = (-1j * r) ** j / math.factorial(j)
            if extra_r and order == 2 and (l, m) == (2, 0):
                fac = r
            terms.append(at0[l] * atr[m] * fac)
    total = sum(terms)
    z = total - np.conj(total)
    if return_scale:
        return z, sum(np.abs(t) for t in terms)
    return z


# -- scattering solutions -------------------------------------------------


def _check_k(k):
    k = float(k)
    if not k > 0:
        raise ValueError(f"scattering solutions need k > 0, got {k!r}")
    return k


def _series_bracket(params: ModelParams, k: float, r) -> np.ndarray:
    """sum_{n>=3} b_n eps**(n-3), with Im of the bracket = sum_n b_n eps**n.

    b_0 = b_1 = b_2 = 0 are the zeta identities and are dropped.  The
    exponential is expanded until its terms fall below double precision.
    """
    eps = k - params.q
    A = _bracket_coeffs(params, r)
    x = np.max(np.abs(eps * r)) if np.size(r) else 0.0
    jmax = 3
    term = 1.0
    while True:
        jmax += 1
        term *= x / jmax
        if term < 1e-18 and jmax > 8:
            break
    # exponential series coefficients (-i r)^j / j!
    E = [np.ones_like(r, dtype=complex)]
    for j in range(1, jmax + 9):
        E.append(E[-1] * (-1j * r) / j)
    out = np.zeros(np.shape(r), dtype=float)
    top = 8 + jmax
    for n in range(top, 2, -1):  # Horner in eps from the top down
        bn = sum((A[l] * E[n - l]).imag for l in range(0, min(n, 8) + 1) if n - l < len(E))
        out = out * eps + bn
    return out


def _branch(params: ModelParams, k: float) -> str:
    return "series" if abs(k - params.q) < eps_switch(params) else "generic"


def psi_regular(params: ModelParams, k, r, branch: str | None = None):
    """Regular scattering solution psi_s(k, r) = (i/2)[F-(k, r) - S(k) F+(k, r)].

    For ``|k - q| < eps_switch`` the expansion about k = q is used with its
    three vanishing orders removed, so psi_s(q, r) = 0 exactly.  ``branch``
    ("generic" or "series") forces one form; the generic form is undefined
    at k = q itself.
    """
    k = _check_k(k)
    r = np.asarray(r, dtype=float)
    q = params.q
    branch = _branch(params, k) if branch is None else branch
    if branch not in ("generic", "series"):
        raise ValueError(f"unknown branch {branch!r}")
    if branch == "generic" and k == q:
        raise ExceptionalPointError("the generic form of psi_s is 0/0 at k = q")
    wp0 = complex(reduced_wronskian(params, k, 0.0, +1))
    W = w1(params, r)
    if branch == "series":
        eps = k - q
        return -eps * _series_bracket(params, k, r) / ((k + q) ** 2 * W * wp0) + 0j
    X = wp0 * reduced_wronskian(params, k, r, -1) * np.exp(-1j * k * r)
    return -X.imag / (((k - q) * (k + q)) ** 2 * W * wp0)


def psi_irregular(params: ModelParams, k, r):
    """Irregular scattering solution psi_is(k, r) = (1/2)[F-(k, r) + S(k) F+(k, r)].

    Raises
    ------
    ExceptionalPointError
        If ``|k - q| < POLE_WINDOW * q``: psi_is has a genuine double pole at k = q.
    """
    k = _check_k(k)
    r = np.asarray(r, dtype=float)
    q = params.q
    if abs(k - q) < POLE_WINDOW * q * (1 - 1e-9):
        raise ExceptionalPointError(f"psi_is has a double pole at k = q = {q}; |k - q| = {abs(k - q):.3g}")
    wp0 = complex(reduced_wronskian(params, k, 0.0, +1))
    X = wp0 * reduced_wronskian(params, k, r, -1) * np.exp(-1j * k * r)
    return X.real / (((k - q) * (k + q)) ** 2 * w1(params, r) * wp0)


def irregular_residue(params: ModelParams, r, offsets=(1e-2, 5e-3, 2.5e-3)):
    """lim_{k->q} (k - q)^2 psi_is(k, r) by Richardson extrapolation.

    ``offsets`` are multiples of q and must halve successively; two
    elimination levels remove the O(eps) and O(eps^2) terms.
    """
    q = params.q
    g = [eps * eps * q * q * psi_irregular(params, q + eps * q, r) for eps in offsets]
    for ratio in (offsets[0] / offsets[1], offsets[1] / offsets[2]):
        if not math.isclose(ratio, 2.0):
            raise ValueError("Richardson offsets must halve successively")
    r1 = [2 * g[1] - g[0], 2 * g[2] - g[1]]
    return (4 * r1[1] - r1[0]) / 3


class SingularDecomposition(NamedTuple):
    """Terms of F^{+-}(k, r) split by their poles at k = +q and k = -q."""

    double_pole_q: np.ndarray
    simple_pole_q: np.ndarray
    double_pole_mq: np.ndarray
    simple_pole_mq: np.ndarray
    regular: np.ndarray


def jost_singular_decomposition(params: ModelParams, k, r, sign: int = +1) -> SingularDecomposition:
    """Split F^{sign} into pole terms at +-q and a remainder regular there.

    About k = q:   e^{-+ i delta} [psi_B/(k - q)^2 + chi_B^{+-}/(k - q)],
    about k = -q:  e^{+- i delta} [psi_B/(k + q)^2 - chi_B^{-+}/(k + q)],
    the second following from F^{+-}(-k, r) = F^{-+}(k, r).
    """
    r = np.asarray(r, dtype=float)
    q = params.q
    ph = np.exp(-sign * 1j * params.delta)
    pb = psi_b(params, r)
    F = jost_normalized(params, k, r, sign)
    dq = ph * pb / (k - q) ** 2
    sq = ph * chi_b_pm(params, r, sign) / (k - q)
    dmq = np.conj(ph) * pb / (k + q) ** 2
    smq = -np.conj(ph) * chi_b_pm(params, r, -sign) / (k + q)
    return SingularDecomposition(dq, sq, dmq, smq, F - dq - sq - dmq - smq)


# -- records --------------------------------------------------------------


@dataclass(frozen=True)
class ScatteringRecord:
    k: float
    s_value: complex
    big_delta: float
    r: np.ndarray
    psi_s: np.ndarray
    psi_is: np.ndarray | None  # None inside the pole window
    branch: str  # "generic" or "series", the form used for psi_s


def scattering_record(params: ModelParams, k: float, r) -> ScatteringRecord:
    r = np.asarray(r, dtype=float)
    near_pole = abs(k - params.q) < POLE_WINDOW * params.q * (1 - 1e-9)
    return ScatteringRecord(
        k=float(k),
        s_value=s_matrix(params, k),
        big_delta=big_delta(params, k),
        r=r,
        psi_s=psi_regular(params, k, r),
        psi_is=None if near_pole else psi_irregular(params, k, r),
        branch=_branch(params, k),
    )


def scattering_sweep(params: ModelParams, ks):
    """(S(k), Delta(k), branch) over a k-grid, Delta continuous from Delta(0) = 0."""
    ks = np.asarray(ks, dtype=float)
    s = s_matrix(params, ks)
    d = big_delta(params, ks)
    branch = np.array([_branch(params, k) for k in ks])
    return s, d, branch
