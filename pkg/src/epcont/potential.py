"""Transformation phase, the Wronskian W1(q, r) and the potential V4(r).

Units: hbar = 1, 2m = 1, so E = k**2 and H = -d^2/dr^2 + V4(r) on r >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .trigpoly import TrigPoly

__all__ = [
    "HBAR",
    "ModelParams",
    "SingularPotentialError",
    "delta",
    "gammas",
    "w1",
    "w1_poly",
    "w1_derivatives",
    "validate_no_singularity",
    "require_no_singularity",
    "potential_v4",
    "CANONICAL",
]

HBAR = 1.0


class SingularPotentialError(ValueError):
    """W1 vanishes at ``r_star``; V4 has a double pole there."""

    def __init__(self, r_star: float, message: str | None = None):
        self.r_star = float(r_star)
        super().__init__(message or f"W1(q, r) vanishes at r* = {self.r_star:.12g}; V4 is singular")


@dataclass(frozen=True)
class ModelParams:
    """Parameters (alpha, beta, q) of one Hamiltonian H[4].

    ``q > 0`` is enforced here.  ``beta != 0`` is a validity condition
    checked by :func:`validate_no_singularity`, so that a zero ``beta`` can
    still be reported with its violation location.
    """

    alpha: float
    beta: float
    q: float

    def __post_init__(self):
        for name in ("alpha", "beta", "q"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.q <= 0:
            raise ValueError(f"q must be positive, got {self.q!r}")

    @property
    def hbar(self) -> float:
        return HBAR

    @property
    def t(self) -> float:
        """tan(delta(q)) = alpha*q - beta."""
        return self.alpha * self.q - self.beta

    @property
    def denom(self) -> float:
        """1 + (alpha*q - beta)**2."""
        return 1.0 + self.t**2

    @property
    def delta(self) -> float:
        return math.atan(self.t)

    @property
    def gamma0(self) -> float:
        return gammas(self)[0]

    @property
    def gamma1(self) -> float:
        return gammas(self)[1]

    @property
    def gamma2(self) -> float:
        return gammas(self)[2]


CANONICAL = ModelParams(alpha=1.0, beta=3.0, q=1.0)


def delta(params: ModelParams, q_arg: float) -> float:
    """Phase of the transformation function, arctan(alpha*q_arg - beta)."""
    return math.atan(params.alpha * q_arg - params.beta)


def gammas(params: ModelParams) -> tuple[float, float, float]:
    """First, second and third q-derivatives of delta at ``params.q``."""
    a, t, d = params.alpha, params.t, params.denom
    g0 = a / d
    g1 = -2.0 * a**2 * t / d**2
    g2 = -2.0 * a**3 * (1.0 - 3.0 * t**2) / d**3
    return g0, g1, g2


@lru_cache(maxsize=256)
def w1_poly(params: ModelParams) -> TrigPoly:
    """W1(q, r) as an exact :class:`TrigPoly` in r (base frequency q)."""
    q, b = params.q, params.beta
    aq, t, d = params.alpha * params.q, params.t, params.denom
    ph = params.delta
    om = q
    qr = TrigPoly.monomial(om, q, 1)
    cos2 = TrigPoly.term(om, 1.0, 0, "cos", 2)
    sin2 = TrigPoly.term(om, 1.0, 0, "sin", 2)
    cos2th = TrigPoly.term(om, 1.0, 0, "cos", 2, 2 * ph)
    sin2th = TrigPoly.term(om, 1.0, 0, "sin", 2, 2 * ph)

    out = TrigPoly.constant(om, 12 * b**2 / d**2)
    out = out + (24 * b * aq / d**2) * (cos2 - 1.0)
    out = out + (12 * aq * (aq**2 + b**2 - 1) / d**2) * sin2
    out = out + 16 * (qr**4 + (4 * aq / d) * qr**3 + (6 * aq**2 / d**2) * qr**2 + (3 * aq**3 / d**2) * qr)
    out = out - 12 * (qr**2 + (2 * aq / d) * qr)
    out = out + 24 * (qr**2 + (2 * aq * (1 - b * t) / d**2) * qr) * cos2th
    out = out + (16 * (qr**3 + (3 * aq / d) * qr**2 + (3 * aq**2 / d**2) * qr) - 12 * qr) * sin2th
    out = out + 3 * (
        ((1 - 6 * t**2 + t**4) / d**2) * sin2 * sin2 + (4 * t * (1 - t**2) / d**2) * sin2 * cos2
    )
    return out


@lru_cache(maxsize=256)
def _w1_derivs(params: ModelParams) -> tuple[TrigPoly, TrigPoly, TrigPoly]:
    p = w1_poly(params)
    d1 = p.derivative()
    return p, d1, d1.derivative()


def w1(params: ModelParams, r):
    """W1(q, r) for scalar or array ``r >= 0``."""
    return w1_poly(params)(r)


def w1_derivatives(params: ModelParams, r):
    """(W1, W1', W1'') at ``r`` using exact termwise differentiation."""
    p, d1, d2 = _w1_derivs(params)
    return p(r), d1(r), d2(r)


def validate_no_singularity(params: ModelParams, r_max: float | None = None) -> float | None:
    """Return ``None`` if W1 > 0 on r >= 0, else the first zero ``r*``.

    W1(q, 0) = 12 beta**2 / (1 + t**2)**2 is checked first; then W1 is
    scanned with step ``min(0.01, pi/(20 q))`` up to ``200/q`` and the first
    sign change is refined by bisection.  Beyond the scan the quartic term
    16 (q r)**4 dominates.
    """
    if params.beta == 0.0:
        return 0.0
    q = params.q
    r_max = 200.0 / q if r_max is None else r_max
    step = min(0.01, math.pi / (20 * q))
    poly = w1_poly(params)
    r = np.arange(0.0, r_max + step, step)
    vals = poly(r)
    bad = np.nonzero(vals <= 0.0)[0]
    if bad.size == 0:
        return None
    i = int(bad[0])
    if i == 0:
        return 0.0
    lo, hi = r[i - 1], r[i]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if poly(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    return float(0.5 * (lo + hi))


def require_no_singularity(params: ModelParams) -> ModelParams:
    """Raise :class:`SingularPotentialError` if V4 would be singular."""
    r_star = validate_no_singularity(params)
    if r_star is not None:
        msg = None
        if params.beta == 0.0:
            msg = "beta = 0 gives W1(q, 0) = 12 beta^2/(1+(alpha q - beta)^2)^2 = 0; V4 is singular at r = 0"
        raise SingularPotentialError(r_star, msg)
    return params


def potential_v4(params: ModelParams, r):
    """V4(r) = -2 (W1'' W1 - W1'^2) / W1^2 with V0 = 0."""
    w, dw, ddw = w1_derivatives(params, r)
    return -2.0 * (ddw * w - dw * dw) / (w * w)
