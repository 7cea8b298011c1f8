"""Time evolution: unitary wavepackets and the pseudounitary Jordan doublet (hbar = 1)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .boundstates import chi_b, jordan_block, psi_b
from .potential import ModelParams
from .scattering import psi_regular

__all__ = [
    "QuadratureUnderResolved",
    "Wavepacket",
    "gaussian_packet",
    "PacketPropagator",
    "propagate_packet",
    "DoubletState",
    "doublet_propagator",
    "evolve_doublet",
    "l2_norm",
]


class QuadratureUnderResolved(UserWarning):
    """Doubling the k-grid resolution changed the packet by more than 1e-4."""


@dataclass(frozen=True)
class Wavepacket:
    """Amplitudes C(k) on a uniform grid of positive wave numbers.

    The packet is Psi_r(r, t) = int C(k) exp(-i k^2 (t - t0)) psi_s(k, r) dk.
    """

    k_grid: np.ndarray
    coeffs: np.ndarray
    t0: float = 0.0
    profile: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        k = np.asarray(self.k_grid, dtype=float)
        c = np.asarray(self.coeffs, dtype=complex)
        if k.ndim != 1 or k.shape != c.shape:
            raise ValueError("k_grid and coeffs must be 1-d arrays of equal length")
        if k.size < 5:
            raise ValueError("a packet needs at least 5 k points")
        if np.any(k <= 0):
            raise ValueError("C(k) must be supported on k > 0")
        dk = np.diff(k)
        if not np.allclose(dk, dk[0], rtol=1e-9, atol=0):
            raise ValueError("k_grid must be uniform")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        object.__setattr__(self, "k_grid", k)
        object.__setattr__(self, "coeffs", c)

    @property
    def norm2(self) -> float:
        """int |C(k)|^2 dk."""
        return float(simpson(np.abs(self.coeffs) ** 2, x=self.k_grid))


def gaussian_packet(k0: float, sigma_k: float, n: int = 201, t0: float = 0.0, width: float = 6.0) -> Wavepacket:
    """C(k) proportional to exp(-(k - k0)^2 / (2 sigma_k^2)) on k > 0, unit int |C|^2 dk.

    The grid spans ``k0 +- width * sigma_k`` clipped to k >= sigma_k / 10.
    """
    if n % 2 == 0:
        n += 1  # Simpson likes an odd count
    lo = max(k0 - width * sigma_k, 0.1 * sigma_k)
    k = np.linspace(lo, k0 + width * sigma_k, n)

    def profile(kk):
        return np.exp(-((kk - k0) ** 2) / (2 * sigma_k**2))

    c = profile(k).astype(complex)
    c /= np.sqrt(simpson(np.abs(c) ** 2, x=k))
    return Wavepacket(k, c, float(t0), profile)


class PacketPropagator:
    """Caches psi_s(k, r) on the packet's k-grid so many times are cheap.

    The resolution check needs psi_s at the k midpoints as well; those are
    computed on first use.  The doubled grid needs the profile callable,
    so packets without one cannot be checked.
    """

    def __init__(self, params: ModelParams, packet: Wavepacket, r_grid):
        self.params = params
        self.packet = packet
        self.r = np.asarray(r_grid, dtype=float)
        self._psi = np.array([psi_regular(params, k, self.r) for k in packet.k_grid])
        self._fine = None

    def _integrate(self, k, c, psi, t):
        phase = np.exp(-1j * k**2 * (t - self.packet.t0))
        return simpson((c * phase)[:, None] * psi, x=k, axis=0)

    def _fine_grid(self):
        if self._fine is None:
            pk = self.packet
            mid = 0.5 * (pk.k_grid[1:] + pk.k_grid[:-1])
            k = np.empty(2 * pk.k_grid.size - 1)
            k[0::2], k[1::2] = pk.k_grid, mid
            psi = np.empty((k.size, self.r.size), dtype=complex)
            psi[0::2] = self._psi
            psi[1::2] = [psi_regular(self.params, x, self.r) for x in mid]
            c = np.empty(k.size, dtype=complex)
            c[0::2] = pk.coeffs
            i = int(np.argmax(np.abs(pk.coeffs)))
            c[1::2] = pk.coeffs[i] / pk.profile(pk.k_grid[i]) * pk.profile(mid)
            self._fine = (k, c, psi)
        return self._fine

    def __call__(self, t: float, check: bool = True) -> np.ndarray:
        pk = self.packet
        out = self._integrate(pk.k_grid, pk.coeffs, self._psi, t)
        if check and pk.profile is not None:
            fine = self._integrate(*self._fine_grid(), t)
            scale = np.max(np.abs(fine))
            change = np.max(np.abs(out - fine)) / scale if scale > 0 else 0.0
            if change > 1e-4:
                warnings.warn(
                    f"k-grid of {pk.k_grid.size} points is under-resolved at t = {t}: "
                    f"doubling it changes the packet by {change:.2e} (relative)",
                    QuadratureUnderResolved,
                    stacklevel=2,
                )
        return out


def propagate_packet(params: ModelParams, packet: Wavepacket, r_grid, t: float, check: bool = True):
    """Psi_r(r, t) by composite Simpson quadrature over the packet's k-grid.

    With ``check`` the quadrature is repeated on the grid with every interval
    halved; a relative change above 1e-4 warns :class:`QuadratureUnderResolved`.
    """
    return PacketPropagator(params, packet, r_grid)(t, check)


def l2_norm(samples, r) -> float:
    return float(np.sqrt(simpson(np.abs(samples) ** 2, x=r)))


# -- Jordan doublet -------------------------------------------------------


@dataclass(frozen=True)
class DoubletState:
    """C(q, t) = exp(-i H_B t) for the Jordan block H_B = [[q^2, 0], [2q, q^2]]."""

    t: float
    c_matrix: np.ndarray

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.c_matrix))

    def apply(self, psi, chi):
        """(psi, chi) -> C (psi, chi), sample-wise."""
        c = self.c_matrix
        return c[0, 0] * psi + c[0, 1] * chi, c[1, 0] * psi + c[1, 1] * chi


def doublet_propagator(params: ModelParams, t: float) -> DoubletState:
    """exp(-i q^2 t) [[1, 0], [-2 i q t, 1]], the closed-form exponential of -i H_B t."""
    q = params.q
    ph = np.exp(-1j * q * q * t)
    return DoubletState(float(t), ph * np.array([[1.0, 0.0], [-2j * q * t, 1.0]]))


def evolve_doublet(params: ModelParams, grid, t: float):
    """psi_B(r, t) = e^{-i q^2 t} psi_B and chi_B(r, t) = e^{-i q^2 t}(chi_B - 2 i q t psi_B)."""
    r = np.asarray(grid, dtype=float)
    q = params.q
    ph = np.exp(-1j * q * q * t)
    pb, cb = psi_b(params, r), chi_b(params, r)
    return ph * pb, ph * (cb - 2j * q * t * pb)


def _block_generator(params: ModelParams) -> np.ndarray:
    """-i H_B, for checks against a general matrix exponential."""
    return -1j * jordan_block(params)
