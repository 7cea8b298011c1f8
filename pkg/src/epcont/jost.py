"""Closed-form Jost solutions of H[4].

The reduced Wronskian w(k, r) = u(k, r) +/- i v(k, r) is a quartic polynomial
in k whose coefficients are exact :class:`~epcont.trigpoly.TrigPoly` objects
in r.  Each term group of u and v is built by its own function
(``u_group_*``, ``v_group_*``) returning a :data:`KR` table
``[c_0(r), ..., c_4(r)]`` of k-power coefficients.

Conventions: complex amplitudes are plain Python/numpy complex numbers;
``sign=+1`` selects the outgoing solution f+ (~ e^{+ikr}) and ``sign=-1``
the incoming one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .potential import ModelParams, w1, w1_derivatives
from .trigpoly import TrigPoly

KR = list  # [TrigPoly] * 5, coefficient of k**j at index j

EP_TOL = 1e-12


class ExceptionalPointError(ValueError):
    """Raised where the flux normalization (k^2 - q^2)^-2 has its double pole."""


def is_exceptional(params: ModelParams, k, tol: float = EP_TOL) -> bool:
    scale = tol * max(1.0, params.q)
    k = np.asarray(k, dtype=float)
    return bool(np.any((np.abs(k - params.q) < scale) | (np.abs(k + params.q) < scale)))


# -- building blocks ------------------------------------------------------


def _kr(kcoeffs, rpart: TrigPoly) -> KR:
    return [float(c) * rpart for c in kcoeffs]


def _kr_add(*tables: KR) -> KR:
    out = [TrigPoly(tables[0][0].omega) for _ in range(5)]
    for tab in tables:
        out = [a + b for a, b in zip(out, tab)]
    return out


class _Blocks:
    """r-dependent pieces shared by the u and v term groups."""

    def __init__(self, params: ModelParams):
        q = params.q
        self.q, self.b = q, params.beta
        self.aq, self.t, self.d = params.alpha * q, params.t, params.denom
        om = q
        ph = params.delta
        self.om = om
        self.qr = TrigPoly.monomial(om, q, 1)
        self.one = TrigPoly.constant(om, 1.0)
        self.cos2 = TrigPoly.term(om, 1.0, 0, "cos", 2)
        self.sin2 = TrigPoly.term(om, 1.0, 0, "sin", 2)
        self.cos2th = TrigPoly.term(om, 1.0, 0, "cos", 2, 2 * ph)
        self.sin2th = TrigPoly.term(om, 1.0, 0, "sin", 2, 2 * ph)
        aq, d, qr = self.aq, self.d, self.qr
        self.poly4 = qr**4 + (4 * aq / d) * qr**3 + (6 * aq**2 / d**2) * qr**2 + (3 * aq**3 / d**2) * qr
        self.poly3 = qr**3 + (3 * aq / d) * qr**2 + (3 * aq**2 / d**2) * qr
        self.poly2 = qr**2 + (2 * aq / d) * qr
        # coefficients of the k-polynomials, index j -> k**j
        self.P = (q**4, 0, 6 * q**2, 0, 1)  # k^4 + 6 q^2 k^2 + q^4
        self.M = (-(q**4), 0, -4 * q**2, 0, 1)  # k^4 - 4 q^2 k^2 - q^4
        self.N = (-(q**4), 0, 0, 0, 1)  # k^4 - q^4
        self.S = (q**4, 0, -2 * q**2, 0, 1)  # (k^2 - q^2)^2
        self.KP = (0, q**3, 0, q, 0)  # q k (k^2 + q^2)
        self.KM = (0, -(q**3), 0, q, 0)  # q k (k^2 - q^2)
        self.K3 = (0, 0, 0, q, 0)  # q k^3
        self.K1 = (0, q**3, 0, 0, 0)  # q^3 k


def _scale(coeffs, c):
    return tuple(c * x for x in coeffs)


# -- u(k, r) term groups --------------------------------------------------


def u_group_constant(B: _Blocks) -> KR:
    c = 12 * B.b * (B.b - 2 * B.aq) / B.d**2
    return _kr(_scale(B.P, c), B.one)


def u_group_cos2qr(B: _Blocks) -> KR:
    c = 24 * B.b * B.aq / B.d**2
    return _kr(_scale(B.M, c), B.cos2)


def u_group_quartic(B: _Blocks) -> KR:
    return _kr(_scale(B.S, 16.0), B.poly4)


def u_group_quadratic(B: _Blocks) -> KR:
    # needed for u + i v to equal the Crum
    # Wronskian (mirrors the -12[(qr)^2 + ...] group of W1)
    return _kr(_scale(B.P, -12.0), B.poly2)


def u_group_cos2theta(B: _Blocks) -> KR:
    lin = (B.aq**2 * B.t / B.d**2) * B.qr
    return _kr_add(
        _kr(_scale(B.M, 24.0), B.poly2 * B.cos2th),
        _kr(_scale(B.N, -48.0), lin * B.cos2th),
    )


def u_group_sin2theta(B: _Blocks) -> KR:
    return _kr_add(
        _kr(_scale(B.N, 16.0), B.poly3 * B.sin2th),
        _kr(_scale(B.M, -12.0), B.qr * B.sin2th),
    )


def u_group_sin2qr(B: _Blocks) -> KR:
    cn = 24 * B.aq**3 / B.d**2
    cm = -12 * B.aq * (1 + B.aq**2 - B.b**2) / B.d**2
    return _kr_add(_kr(_scale(B.N, cn), B.sin2), _kr(_scale(B.M, cm), B.sin2))


def u_group_fourth_harmonic(B: _Blocks) -> KR:
    t, d = B.t, B.d
    inner = ((1 - 6 * t**2 + t**4) / d**2) * B.sin2 * B.sin2 + (4 * t * (1 - t**2) / d**2) * B.sin2 * B.cos2
    return _kr(_scale(B.P, 3.0), inner)


U_GROUPS: dict[str, Callable[[_Blocks], KR]] = {
    "constant": u_group_constant,
    "cos2qr": u_group_cos2qr,
    "quartic": u_group_quartic,
    "quadratic": u_group_quadratic,
    "cos2theta": u_group_cos2theta,
    "sin2theta": u_group_sin2theta,
    "sin2qr": u_group_sin2qr,
    "fourth_harmonic": u_group_fourth_harmonic,
}


# -- v(k, r) term groups --------------------------------------------------


def v_group_constant(B: _Blocks) -> KR:
    b, aq, d, q = B.b, B.aq, B.d, B.q
    c = 24 * b / d**2
    lo = b**2 - 4 * b * aq - 1
    # q k [lo (k^2 + q^2) + aq^2 (q^2 + 5 k^2)]
    coeffs = (0, c * q * (lo * q**2 + aq**2 * q**2), 0, c * q * (lo + 5 * aq**2), 0)
    return _kr(coeffs, B.one)


def v_group_cos2qr(B: _Blocks) -> KR:
    b, aq, d = B.b, B.aq, B.d
    c1 = 24 * b * (b**2 - 4 * b * aq + aq**2 + 1) / d**2
    c3 = 96 * b * aq**2 / d**2
    return _kr_add(_kr(_scale(B.KP, c1), B.cos2), _kr(_scale(B.K3, c3), B.cos2))


def v_group_cubic(B: _Blocks) -> KR:
    return _kr(_scale(B.KM, 64.0), B.poly3)


def v_group_linear(B: _Blocks) -> KR:
    return _kr(_scale(B.KP, -24.0), B.qr)


def v_group_cos2theta(B: _Blocks) -> KR:
    return _kr_add(
        _kr(_scale(B.KM, 32.0), B.poly3 * B.cos2th),
        _kr(_scale(B.KP, 24.0), B.qr * B.cos2th),
    )


def v_group_sin2theta(B: _Blocks) -> KR:
    lin = (B.aq**2 * B.t / B.d**2) * B.qr
    return _kr_add(
        _kr(_scale(B.K1, 96.0), B.poly2 * B.sin2th),
        _kr(_scale(B.KM, 96.0), lin * B.sin2th),
    )


def v_group_sin2qr(B: _Blocks) -> KR:
    t, b, aq, d = B.t, B.b, B.aq, B.d
    cp = 12 * (t**4 + 4 * b * aq - 1) / d**2
    cm = -48 * aq**2 / d**2
    return _kr_add(_kr(_scale(B.KP, cp), B.sin2), _kr(_scale(B.KM, cm), B.sin2))


def v_group_fourth_harmonic(B: _Blocks) -> KR:
    t, d = B.t, B.d
    inner = ((1 - 6 * t**2 + t**4) / d**2) * B.sin2 * B.cos2 - (4 * t * (1 - t**2) / d**2) * B.sin2 * B.sin2
    return _kr(_scale(B.KP, 12.0), inner)


V_GROUPS: dict[str, Callable[[_Blocks], KR]] = {
    "constant": v_group_constant,
    "cos2qr": v_group_cos2qr,
    "cubic": v_group_cubic,
    "linear": v_group_linear,
    "cos2theta": v_group_cos2theta,
    "sin2theta": v_group_sin2theta,
    "sin2qr": v_group_sin2qr,
    "fourth_harmonic": v_group_fourth_harmonic,
}


@lru_cache(maxsize=256)
def blocks(params: ModelParams) -> _Blocks:
    return _Blocks(params)


@lru_cache(maxsize=256)
def u_table(params: ModelParams) -> tuple[TrigPoly, ...]:
    """u(k, r) = sum_j k**j * u_table[j](r)."""
    B = blocks(params)
    return tuple(_kr_add(*(g(B) for g in U_GROUPS.values())))


@lru_cache(maxsize=256)
def v_table(params: ModelParams) -> tuple[TrigPoly, ...]:
    """v(k, r) = sum_j k**j * v_table[j](r)."""
    B = blocks(params)
    return tuple(_kr_add(*(g(B) for g in V_GROUPS.values())))


def _eval_table(table, k, r, deriv: int = 0):
    """sum_j k**j c_j^{(deriv)}(r) with broadcasting of k against r."""
    k = np.asarray(k, dtype=float)
    r = np.asarray(r, dtype=float)
    cols = [c.derivative(deriv) if deriv else c for c in table]
    return sum(k**j * cols[j](r) for j in range(5) if cols[j].coeffs)


# -- public operations ----------------------------------------------------


def u(params: ModelParams, k, r):
    """Real part of the reduced Wronskian."""
    return _eval_table(u_table(params), k, r)


def v(params: ModelParams, k, r):
    """Imaginary part of w+ (odd in k)."""
    return _eval_table(v_table(params), k, r)


def u_at_origin(params: ModelParams, k):
    """u(k, 0) from its own closed form."""
    b, aq, q, d = params.beta, params.alpha * params.q, params.q, params.denom
    k = np.asarray(k, dtype=float)
    return 12 * b / d**2 * (b * k**4 + (6 * b - 20 * aq) * k**2 * q**2 + (b - 4 * aq) * q**4)


def v_at_origin(params: ModelParams, k):
    """v(k, 0) from its own closed form."""
    b, aq, q, d = params.beta, params.alpha * params.q, params.q, params.denom
    k = np.asarray(k, dtype=float)
    return (
        48 * b * q * k / d**2
        * ((b**2 - 4 * b * aq + 5 * aq**2) * k**2 + (b**2 - 4 * b * aq + aq**2) * q**2)
    )


def reduced_wronskian(params: ModelParams, k, r, sign: int = +1):
    """w^{sign}(k, r) = u(k, r) + sign * i v(k, r)."""
    _check_sign(sign)
    return u(params, k, r) + sign * 1j * v(params, k, r)


def reduced_wronskian_prime(params: ModelParams, k, r, sign: int = +1):
    """Exact r-derivative of :func:`reduced_wronskian`."""
    _check_sign(sign)
    return _eval_table(u_table(params), k, r, 1) + sign * 1j * _eval_table(v_table(params), k, r, 1)


def jost_unnormalized(params: ModelParams, k, r, sign: int = +1):
    """f^{sign}(k, r) = w^{sign}(k, r) e^{sign i k r} / W1(q, r)."""
    k = np.asarray(k, dtype=float)
    r = np.asarray(r, dtype=float)
    return reduced_wronskian(params, k, r, sign) * np.exp(sign * 1j * k * r) / w1(params, r)


def jost_unnormalized_prime(params: ModelParams, k, r, sign: int = +1):
    """Exact d/dr of f^{sign}(k, r)."""
    k = np.asarray(k, dtype=float)
    r = np.asarray(r, dtype=float)
    w = reduced_wronskian(params, k, r, sign)
    dw = reduced_wronskian_prime(params, k, r, sign)
    W, dW, _ = w1_derivatives(params, r)
    phase = np.exp(sign * 1j * k * r)
    return ((dw + sign * 1j * k * w) * W - w * dW) / W**2 * phase


def flux_factor(params: ModelParams, k):
    """(k^2 - q^2)^2, the probability flux of f+- at infinity."""
    k = np.asarray(k, dtype=float)
    return ((k - params.q) * (k + params.q)) ** 2  # factored: no cancellation near k = q


def jost_normalized(params: ModelParams, k, r, sign: int = +1):
    """F^{sign}(k, r) = f^{sign}(k, r) / (k^2 - q^2)^2 (unit flux).

    Raises
    ------
    ExceptionalPointError
        If ``|k -+ q| < 1e-12 max(1, q)``.
    """
    if is_exceptional(params, k):
        raise ExceptionalPointError(f"k = {k} is an exceptional point (k^2 = q^2 = {params.q**2})")
    return jost_unnormalized(params, k, r, sign) / flux_factor(params, k)


def wronskian_closed(params: ModelParams, k):
    """W(f+, f-) = -2 i k (k + q)^4 (k - q)^4."""
    k = np.asarray(k, dtype=float)
    q = params.q
    out = -2j * k * (k + q) ** 4 * (k - q) ** 4
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class JostSample:
    k: float
    r: float
    f_plus: complex
    f_minus: complex
    F_plus: complex | None
    F_minus: complex | None


def jost_sample(params: ModelParams, k: float, r: float) -> JostSample:
    fp = complex(jost_unnormalized(params, k, r, +1))
    fm = complex(jost_unnormalized(params, k, r, -1))
    if is_exceptional(params, k):
        Fp = Fm = None
    else:
        n = float(flux_factor(params, k))
        Fp, Fm = fp / n, fm / n
    return JostSample(float(k), float(r), fp, fm, Fp, Fm)


def _check_sign(sign):
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
