"""Jordan cycle {psi_B, chi_B} embedded in the continuum at E = q^2."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potential import ModelParams, gammas, potential_v4, w1

__all__ = [
    "psi_b",
    "chi_b",
    "chi_b_pm",
    "jordan_block",
    "ETA",
    "JordanDoublet",
    "jordan_doublet",
    "jordan_chain_residuals",
]

ETA = np.array([[0.0, 1.0], [1.0, 0.0]])


def _angles(params: ModelParams, r):
    r = np.asarray(r, dtype=float)
    theta = params.q * r + params.delta
    gam = r + params.gamma0
    return r, theta, gam


def psi_b(params: ModelParams, r):
    """Bound state in the continuum, H psi_B = q^2 psi_B (unnormalized)."""
    q = params.q
    _, g1, _ = gammas(params)
    r, th, g = _angles(params, r)
    s, c = np.sin(th), np.cos(th)
    num = -2 * q**2 * g**2 * c + (q * g + q**2 * g1) * s + s**2 * c
    return 24 * q**2 * num / w1(params, r)


def chi_b(params: ModelParams, r):
    """Generalized eigenfunction, H chi_B = q^2 chi_B + 2 q psi_B."""
    q = params.q
    _, g1, g2 = gammas(params)
    r, th, g = _angles(params, r)
    s, c = np.sin(th), np.cos(th)
    num = (
        -2 * q**3 * g**3 * s
        - 3 * q**2 * g**2 * c
        + 3 * q * g * s**3
        - g2 * q**3 * s
        + 3 * g1 * g * q**3 * c
        + 3 * s**2 * c
    )
    return 8 * q * num / w1(params, r)


def chi_b_pm(params: ModelParams, r, sign: int = +1):
    """chi_B^{sign} = chi_B - sign * i gamma0 psi_B."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return chi_b(params, r) - sign * 1j * params.gamma0 * psi_b(params, r)


def jordan_block(params: ModelParams) -> np.ndarray:
    """Matrix of H[4] on span{psi_B, chi_B}: [[q^2, 0], [2q, q^2]]."""
    q = params.q
    return np.array([[q * q, 0.0], [2 * q, q * q]])


@dataclass(frozen=True)
class JordanDoublet:
    q: float
    grid: np.ndarray
    psi_b: np.ndarray
    chi_b: np.ndarray
    h_block: np.ndarray


def jordan_doublet(params: ModelParams, grid) -> JordanDoublet:
    grid = np.asarray(grid, dtype=float)
    return JordanDoublet(params.q, grid, psi_b(params, grid), chi_b(params, grid), jordan_block(params))


def jordan_chain_residuals(params: ModelParams, r_min: float = 0.5, r_max: float = 30.0, h: float = 1e-3):
    """Max-norm residuals of the two chain equations.

    Uses 5-point second differences on a uniform grid from ``r_min`` to
    ``r_max``; the two stencil rows at each end are dropped.  Returns
    ``(res_psi, res_chi, scale_psi, scale_chi)`` where the scales are the
    max-norms the residuals should be compared against.
    """
    from .oracle import fd_second_derivative

    if r_min < 2 * h:
        raise ValueError("r_min must leave room for the stencil")
    r = np.arange(r_min - 2 * h, r_max + 2.5 * h, h)
    psi, chi = psi_b(params, r), chi_b(params, r)
    vin = potential_v4(params, r[2:-2])
    q2 = params.q**2
    res1 = -fd_second_derivative(psi, h) + (vin - q2) * psi[2:-2]
    res2 = -fd_second_derivative(chi, h) + (vin - q2) * chi[2:-2] - 2 * params.q * psi[2:-2]
    s_psi = np.abs(psi[2:-2]).max()
    s_chi = max(np.abs(chi[2:-2]).max(), s_psi)
    return float(np.abs(res1).max()), float(np.abs(res2).max()), float(s_psi), float(s_chi)
