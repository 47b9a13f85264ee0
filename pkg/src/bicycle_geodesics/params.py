"""Geodesic parameters (a, b) and the quantities derived from them."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .elliptic import Modulus, complete_k
from .errors import DomainError


@dataclass(frozen=True)
class GeodesicParams:
    """The pair ``(a, b)`` plus everything the closed forms need.

    ``omega`` and ``k`` parametrize ``kappa^2(t) = (1+a)^2 - 4a sn^2(omega t, k)``;
    ``A``, ``B``, ``n`` enter the cylindrical track.  ``one_minus_n`` is
    kept exactly as ``B**2`` since ``n -> 1`` is the delicate case.
    ``period_T`` is the period of kappa^2 (``inf`` at the soliton).
    """

    a: float
    b: float
    p_norm: float
    omega: float
    k: Modulus
    A: float
    B: float
    n: float
    one_minus_n: float
    period_T: float

    @classmethod
    def from_ab(cls, a: float, b: float) -> "GeodesicParams":
        a = float(a)
        b = float(b)
        if a < 0:
            raise DomainError("a must be nonnegative (use reflect_params for the mirror image)")
        p2 = a * a + b * b
        p_norm = math.sqrt(p2)
        denom = (a + 1.0) ** 2 + b * b
        omega = math.sqrt(denom) / 2.0
        mod = Modulus.from_m(4.0 * a / denom, ((a - 1.0) ** 2 + b * b) / denom)
        if p2 > 0:
            A = (p2 + a) * ((p2 + a) / p2)
            B = (p2 - a) / (p2 + a)
            n = 4.0 * a / A
            one_minus_n = B * B
        else:
            A = B = n = one_minus_n = math.nan
        T = 2.0 * complete_k(mod) / omega if mod.mc > 0 else math.inf
        return cls(a, b, p_norm, omega, mod, A, B, n, one_minus_n, T)

    @property
    def is_circle(self) -> bool:
        return self.a == 0.0

    @property
    def is_soliton(self) -> bool:
        return self.a == 1.0 and self.b == 0.0

    @property
    def kappa_period(self) -> float:
        """Period of kappa itself: doubled at a = 1."""
        return 2.0 * self.period_T if self.a == 1.0 else self.period_T
