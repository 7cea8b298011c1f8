"""Exact polynomial-trigonometric functions of the radial coordinate.

A :class:`TrigPoly` represents

    f(r) = sum_{p, n} r**p * (a_pn * cos(n*omega*r) + b_pn * sin(n*omega*r))

with integer powers ``p >= 0`` and integer harmonics ``n >= 0`` of a single
base frequency ``omega``.  Sums, products and r-derivatives stay inside the
class without truncation, which is what lets the potential be built from
exact derivatives of the Wronskian instead of finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = ["TrigPoly"]

_KINDS = ("const", "cos", "sin")


@dataclass(frozen=True)
class TrigPoly:
    """Finite sum of ``r**p * {cos, sin}(n*omega*r)`` terms.

    Parameters
    ----------
    omega : float
        Base angular frequency shared by every term.
    coeffs : mapping
        ``{(power, harmonic): (cos_coeff, sin_coeff)}``.  The sine
        coefficient of harmonic 0 is ignored.
    """

    omega: float
    coeffs: Mapping[tuple[int, int], tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (p, n), (a, b) in self.coeffs.items():
            if p < 0 or n < 0:
                raise ValueError(f"negative power/harmonic in term {(p, n)}")
            if n == 0:
                b = 0.0
            if a != 0.0 or b != 0.0:
                clean[(int(p), int(n))] = (float(a), float(b))
        object.__setattr__(self, "coeffs", clean)

    # -- construction -----------------------------------------------------

    @classmethod
    def term(cls, omega, coeff, power=0, kind="const", harmonic=0, phase=0.0):
        """Single term ``coeff * r**power * kind(harmonic*omega*r + phase)``.

        The phase is folded into cosine/sine coefficients at construction.
        """
        if kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
        if kind == "const":
            return cls(omega, {(power, 0): (coeff, 0.0)})
        c, s = math.cos(phase), math.sin(phase)
        if kind == "cos":
            # cos(x + ph) = cos ph cos x - sin ph sin x
            a, b = coeff * c, -coeff * s
        else:
            # sin(x + ph) = sin ph cos x + cos ph sin x
            a, b = coeff * s, coeff * c
        if harmonic == 0:
            return cls(omega, {(power, 0): (a, 0.0)})
        return cls(omega, {(power, harmonic): (a, b)})

    @classmethod
    def constant(cls, omega, value):
        return cls(omega, {(0, 0): (value, 0.0)})

    @classmethod
    def monomial(cls, omega, coeff, power):
        return cls(omega, {(power, 0): (coeff, 0.0)})

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> list[tuple[float, int, str, float, float]]:
        """Canonical ``(coeff, power, kind, freq, phase)`` list; phase is 0."""
        out = []
        for (p, n), (a, b) in sorted(self.coeffs.items()):
            if n == 0:
                out.append((a, p, "const", 0.0, 0.0))
                continue
            if a:
                out.append((a, p, "cos", n * self.omega, 0.0))
            if b:
                out.append((b, p, "sin", n * self.omega, 0.0))
        return out

    @property
    def degree(self) -> int:
        return max((p for p, _ in self.coeffs), default=0)

    def __iter__(self) -> Iterator[tuple[tuple[int, int], tuple[float, float]]]:
        return iter(sorted(self.coeffs.items()))

    def __repr__(self):
        return f"TrigPoly(omega={self.omega!r}, nterms={len(self.coeffs)})"

    # -- evaluation -------------------------------------------------------

    def _arrays(self):
        arr = self.__dict__.get("_arr")
        if arr is None:
            items = sorted(self.coeffs.items())
            p = np.array([k[0] for k, _ in items], dtype=float)
            w = np.array([k[1] * self.omega for k, _ in items], dtype=float)
            a = np.array([v[0] for _, v in items], dtype=float)
            b = np.array([v[1] for _, v in items], dtype=float)
            arr = (p, w, a, b)
            object.__setattr__(self, "_arr", arr)
        return arr

    def __call__(self, r):
        p, w, a, b = self._arrays()
        r = np.asarray(r, dtype=float)
        x = r[..., None]
        out = np.sum(x**p * (a * np.cos(w * x) + b * np.sin(w * x)), axis=-1)
        return out if out.ndim else float(out)

    # -- algebra ----------------------------------------------------------

    def _check(self, other: TrigPoly):
        if other.omega != self.omega:
            raise ValueError("TrigPoly operands have different base frequencies")

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(self.omega, other)
        self._check(other)
        acc = dict(self.coeffs)
        for key, (a, b) in other.coeffs.items():
            a0, b0 = acc.get(key, (0.0, 0.0))
            acc[key] = (a0 + a, b0 + b)
        return TrigPoly(self.omega, acc)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly(self.omega, {k: (-a, -b) for k, (a, b) in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TrigPoly):
            c = float(other)
            return TrigPoly(self.omega, {k: (c * a, c * b) for k, (a, b) in self.coeffs.items()})
        self._check(other)
        acc: dict[tuple[int, int], list[float]] = {}

        def put(p, n, a, b):
            # sin(-x) = -sin(x)
            if n < 0:
                n, b = -n, -b
            slot = acc.setdefault((p, n), [0.0, 0.0])
            slot[0] += a
            slot[1] += b

        for (p1, n1), (a1, b1) in self.coeffs.items():
            for (p2, n2), (a2, b2) in other.coeffs.items():
                p = p1 + p2
                # product-to-sum on (a1 cos x + b1 sin x)(a2 cos y + b2 sin y)
                s, d = n1 + n2, n1 - n2
                put(p, s, 0.5 * (a1 * a2 - b1 * b2), 0.5 * (a1 * b2 + b1 * a2))
                put(p, d, 0.5 * (a1 * a2 + b1 * b2), 0.5 * (b1 * a2 - a1 * b2))
        return TrigPoly(self.omega, {k: tuple(v) for k, v in acc.items()})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not representable")
        out = TrigPoly.constant(self.omega, 1.0)
        for _ in range(n):
            out = out * self
        return out

    def derivative(self, order: int = 1) -> TrigPoly:
        """Exact ``d^order/dr^order``."""
        out = self
        for _ in range(order):
            acc: dict[tuple[int, int], list[float]] = {}
            for (p, n), (a, b) in out.coeffs.items():
                w = n * out.omega
                if p:
                    slot = acc.setdefault((p - 1, n), [0.0, 0.0])
                    slot[0] += p * a
                    slot[1] += p * b
                if n:
                    slot = acc.setdefault((p, n), [0.0, 0.0])
                    slot[0] += w * b
                    slot[1] += -w * a
            out = TrigPoly(out.omega, {k: tuple(v) for k, v in acc.items()})
        return out

    def chop(self, tol: float = 0.0) -> TrigPoly:
        """Drop terms whose coefficients are all below ``tol`` in magnitude."""
        return TrigPoly(
            self.omega,
            {k: (a, b) for k, (a, b) in self.coeffs.items() if max(abs(a), abs(b)) > tol},
        )

    def max_coeff(self) -> float:
        return max((max(abs(a), abs(b)) for a, b in self.coeffs.values()), default=0.0)


def tp_sum(polys: Iterable[TrigPoly], omega: float) -> TrigPoly:
    out = TrigPoly(omega)
    for p in polys:
        out = out + p
    return out
