"""Independent numerical checks for the closed forms.

Nothing here uses the closed-form Jost solutions, bound states or
scattering solutions.  The only shared ingredient is V4 itself (which is
checked separately against finite differences of W1).  The Crum
determinant construction rebuilds W1 and the reduced Wronskians straight
from the transformation function sin(q r + delta(q)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded
from scipy.special import erfc

from .potential import ModelParams, gammas, potential_v4
from .trigpoly import TrigPoly

__all__ = [
    "RadialGrid",
    "StiffnessFailure",
    "SolverFailure",
    "integrate_jost",
    "jost_r_max",
    "fd_first_derivative",
    "fd_second_derivative",
    "crank_nicolson_step",
    "CrankNicolson",
    "crum_wronskians",
]


class StiffnessFailure(RuntimeError):
    """The adaptive integrator exceeded its step budget."""


class SolverFailure(RuntimeError):
    """The tridiagonal solve produced non-finite values."""


@dataclass(frozen=True)
class RadialGrid:
    r_min: float
    r_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 9:
            raise ValueError("a radial grid needs at least 9 points (5-point stencil)")
        if not self.r_max > self.r_min >= 0.0:
            raise ValueError(f"need 0 <= r_min < r_max, got [{self.r_min}, {self.r_max}]")

    @property
    def h(self) -> float:
        return (self.r_max - self.r_min) / (self.n_points - 1)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_points)


# -- inward Jost integration ---------------------------------------------


def jost_r_max(params: ModelParams, k: float) -> float:
    """Default outer radius for :func:`integrate_jost`."""
    q = params.q
    return max(200.0 / q, 60.0 / min(abs(k - q), k))


def integrate_jost(
    params: ModelParams,
    k: float,
    grid: RadialGrid | np.ndarray,
    *,
    r_max: float | None = None,
    rtol: float = 1e-10,
    potential: Callable | None = None,
    max_rhs_evals: int = 5_000_000,
    return_derivative: bool = False,
):
    """Outgoing solution of -psi'' + V psi = k^2 psi, integrated inward.

    The potential is switched off smoothly with ``erfc((r - 0.75 R)/(R/20))/2``
    on the outer half of [0, R], so for r near R the solution is exactly
    ``e^{ikr}``; it is started there with psi = e^{ikR}, psi' = ik e^{ikR}
    and integrated inward with the embedded Dormand-Prince 4(5) pair.  A
    smooth switch-off reflects almost nothing, so on r <= R/2 the result is
    the Jost solution up to a constant factor.

    ``grid`` points must lie in [0, R/2].
    """
    q = params.q
    if k <= 0:
        raise ValueError("integrate_jost needs k > 0")
    if abs(k - q) <= 1e-6 or abs(k + q) <= 1e-6:
        raise ValueError("k is too close to an exceptional point for the oracle")
    R = jost_r_max(params, k) if r_max is None else float(r_max)
    r_eval = grid.r if isinstance(grid, RadialGrid) else np.asarray(grid, dtype=float)
    if r_eval.min() < 0 or r_eval.max() > 0.5 * R * (1 + 1e-12):
        raise ValueError(f"grid must lie inside [0, {0.5 * R}] for r_max = {R}")

    vfun = (lambda r: potential_v4(params, r)) if potential is None else potential
    center, width = 0.75 * R, R / 20.0
    k2 = k * k
    count = 0

    def rhs(r, y):
        nonlocal count
        count += 1
        if count > max_rhs_evals:
            raise StiffnessFailure(f"more than {max_rhs_evals} right-hand-side evaluations")
        vr = vfun(r) * 0.5 * erfc((r - center) / width)
        return np.array([y[1], (vr - k2) * y[0]])

    y0 = np.array([np.exp(1j * k * R), 1j * k * np.exp(1j * k * R)])
    order = np.argsort(r_eval)[::-1]
    t_eval = r_eval[order]
    r_end = min(t_eval[-1], R)
    sol = solve_ivp(rhs, (R, r_end), y0, method="RK45", rtol=rtol, atol=1e-14, t_eval=t_eval)
    if not sol.success:
        raise StiffnessFailure(sol.message)
    psi = np.empty(r_eval.shape, dtype=complex)
    dpsi = np.empty(r_eval.shape, dtype=complex)
    psi[order] = sol.y[0]
    dpsi[order] = sol.y[1]
    return (psi, dpsi) if return_derivative else psi


# -- finite differences ---------------------------------------------------


def fd_first_derivative(samples, h: float):
    """4th-order central first derivative; two points dropped at each end."""
    f = np.asarray(samples)
    return (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)


def fd_second_derivative(samples, h: float):
    """4th-order central second derivative; two points dropped at each end."""
    f = np.asarray(samples)
    return (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)


# -- Crank-Nicolson -------------------------------------------------------


def _cn_bands(potential, dt: float, h: float):
    v = np.asarray(potential, dtype=float)
    n = v.size
    off = -1.0 / h**2
    diag = 2.0 / h**2 + v
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = 0.5j * dt * off
    ab[1, :] = 1.0 + 0.5j * dt * diag
    ab[2, :-1] = 0.5j * dt * off
    return ab, diag, off


def _apply_rhs(state, diag, off, dt):
    hpsi = diag * state
    hpsi[1:] += off * state[:-1]
    hpsi[:-1] += off * state[1:]
    return state - 0.5j * dt * hpsi


def _left_wall(rhs, off, dt, left):
    # inhomogeneous Dirichlet value at the left wall, (g_n, g_{n+1})
    if left is not None:
        rhs[0] -= 0.5j * dt * off * (left[0] + left[1])
    return rhs


def crank_nicolson_step(state, potential, dt: float, h: float, left=None):
    """One Cayley step of i d/dt psi = (-d^2/dr^2 + V) psi.

    ``state`` holds psi at r_j = r_0 + j h with walls one grid spacing
    beyond the first and last point.  The right wall is homogeneous; the
    left wall is too unless ``left = (g_old, g_new)`` gives its values at
    the start and end of the step.
    """
    ab, diag, off = _cn_bands(potential, dt, h)
    rhs = _left_wall(_apply_rhs(np.asarray(state, dtype=complex), diag, off, dt), off, dt, left)
    out = solve_banded((1, 1), ab, rhs)
    if not np.all(np.isfinite(out)):
        raise SolverFailure("tridiagonal solve returned non-finite values")
    return out


class CrankNicolson:
    """Repeated Crank-Nicolson stepping with the band matrix built once."""

    def __init__(self, potential, dt: float, h: float):
        self.dt, self.h = float(dt), float(h)
        self._ab, self._diag, self._off = _cn_bands(potential, dt, h)

    def step(self, state, left=None):
        rhs = _left_wall(_apply_rhs(state, self._diag, self._off, self.dt), self._off, self.dt, left)
        out = solve_banded((1, 1), self._ab, rhs)
        if not np.all(np.isfinite(out)):
            raise SolverFailure("tridiagonal solve returned non-finite values")
        return out

    def evolve(self, state, n_steps: int, left: Callable | None = None, t0: float = 0.0):
        """Take ``n_steps`` steps; ``left(t)`` optionally drives the left wall."""
        psi = np.asarray(state, dtype=complex)
        for n in range(n_steps):
            bc = None
            if left is not None:
                bc = (left(t0 + n * self.dt), left(t0 + (n + 1) * self.dt))
            psi = self.step(psi, bc)
        return psi


# -- Crum determinant -----------------------------------------------------


def _det(rows):
    if len(rows) == 1:
        return rows[0][0]
    out = None
    for j in range(len(rows)):
        minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
        term = rows[0][j] * _det(minor)
        term = term if j % 2 == 0 else -term
        out = term if out is None else out + term
    return out


@lru_cache(maxsize=64)
def crum_wronskians(params: ModelParams) -> tuple[TrigPoly, tuple[TrigPoly, ...]]:
    """W1 and the cofactors C_n of the five-function Wronskian.

    The columns are phi = sin(q r + delta(q)) and its first three
    q-derivatives; the reduced Wronskian is then
    ``w^{+-}(k, r) = sum_n (+- i k)**n C_n(r)``.
    """
    q = params.q
    g0, g1, g2 = gammas(params)
    ph = params.delta
    s = TrigPoly.term(q, 1.0, 0, "sin", 1, ph)
    c = TrigPoly.term(q, 1.0, 0, "cos", 1, ph)
    gam = TrigPoly.monomial(q, 1.0, 1) + g0  # d theta / dq
    cols = [s, gam * c, g1 * c - gam * gam * s, (g2 - gam**3) * c - 3 * g1 * gam * s]
    rows = [[f.derivative(i) for f in cols] for i in range(5)]
    w1 = _det(rows[:4])
    cof = []
    for n in range(5):
        sub = [rows[i] for i in range(5) if i != n]
        m = _det(sub)
        cof.append(m if (n + 4) % 2 == 0 else -m)
    return w1, tuple(cof)


def crum_reduced_wronskian(params: ModelParams, k, r, sign: int = +1):
    _, cof = crum_wronskians(params)
    k = np.asarray(k, dtype=float)
    return sum((sign * 1j * k) ** n * cof[n](r) for n in range(5))


def free_gaussian(r, t, r0: float, k0: float, sigma: float):
    """Free evolution (H = -d^2/dr^2) of a Gaussian on the full line.

    ``sigma`` is the position spread of |psi|^2 at t = 0; it grows as
    sqrt(sigma^2 + t^2/sigma^2).
    """
    r = np.asarray(r, dtype=float)
    a = sigma**2 + 1j * t
    pref = (2 * math.pi * sigma**2) ** -0.25 * np.sqrt(sigma**2 / a)
    return pref * np.exp(-((r - r0 - 2 * k0 * t) ** 2) / (4 * a) + 1j * k0 * (r - r0) - 1j * k0**2 * t)
