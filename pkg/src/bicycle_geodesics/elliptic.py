"""Elliptic integrals and Jacobi elliptic functions for real arguments.

Complete and incomplete integrals are evaluated through Carlson's symmetric
forms R_F, R_D, R_J (duplication theorem plus a fifth-order Taylor tail).
Jacobi sn, cn, dn use the descending Landen transformation seeded by the
arithmetic-geometric mean.

The incomplete integrals take the *Jacobi* argument ``x`` (not the amplitude):

    E(x, k)    = x - k^2 * int_0^x sn^2(s, k) ds
    Pi(x, n, k) = int_0^x ds / (1 - n sn^2(s, k))

References
----------
B. C. Carlson, "Numerical computation of real or complex elliptic
integrals", Numer. Algorithms 10 (1995) 13-26.
Abramowitz & Stegun, 16.4 (AGM method for Jacobi functions).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DivergenceError, DomainError

__all__ = [
    "Modulus",
    "EllipticKind",
    "EllipticEval",
    "carlson_rf",
    "carlson_rd",
    "carlson_rj",
    "carlson_rc",
    "complete_k",
    "complete_e",
    "complete_pi",
    "incomplete_e",
    "incomplete_pi",
    "jacobi_sn_cn_dn",
    "evaluate",
]

_EPS = 2.220446049250313e-16
# duplication stops once the Taylor tail error is below ~eps
_RF_TOL = (3.0 * _EPS) ** (-1.0 / 8.0)
_RDJ_TOL = (0.25 * _EPS) ** (-1.0 / 8.0)


@dataclass(frozen=True)
class Modulus:
    """Elliptic modulus ``k`` with parameter ``m = k**2`` and its complement.

    Build with :meth:`from_k` or :meth:`from_m`.  ``mc = 1 - m`` is kept
    separately so that callers who know the complement exactly (k -> 1)
    do not lose digits.
    """

    k: float
    m: float
    mc: float

    @classmethod
    def from_k(cls, k: float) -> "Modulus":
        k = float(k)
        if not (0.0 <= k <= 1.0):
            raise DomainError(f"modulus k={k!r} outside [0, 1]")
        m = k * k
        return cls(k, m, (1.0 - k) * (1.0 + k))

    @classmethod
    def from_m(cls, m: float, mc: float | None = None) -> "Modulus":
        m = float(m)
        if not (0.0 <= m <= 1.0):
            raise DomainError(f"parameter m={m!r} outside [0, 1]")
        if mc is None:
            mc = 1.0 - m
        return cls(math.sqrt(m), m, float(mc))


class EllipticKind(enum.Enum):
    K = "K"
    E_COMPLETE = "E_complete"
    PI_COMPLETE = "Pi_complete"
    E_INCOMPLETE = "E_incomplete"
    PI_INCOMPLETE = "Pi_incomplete"
    SN = "sn"
    CN = "cn"
    DN = "dn"


@dataclass(frozen=True)
class EllipticEval:
    value: float
    modulus: Modulus
    kind: EllipticKind


# -- Carlson symmetric integrals ---------------------------------------------


def carlson_rf(x: float, y: float, z: float) -> float:
    """R_F(x, y, z) = 1/2 int_0^inf dt / sqrt((t+x)(t+y)(t+z))."""
    if x < 0 or y < 0 or z < 0:
        raise DomainError("carlson_rf requires nonnegative arguments")
    if (x == 0) + (y == 0) + (z == 0) >= 2:
        raise DomainError("carlson_rf: at most one argument may be zero")
    x0, y0 = x, y
    a0 = (x + y + z) / 3.0
    q = _RF_TOL * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a = a0
    fac = 1.0  # 4**-m
    while q * fac >= abs(a):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        fac *= 0.25
    X = (a0 - x0) * fac / a
    Y = (a0 - y0) * fac / a
    Z = -(X + Y)
    e2 = X * Y - Z * Z
    e3 = X * Y * Z
    return (
        1.0
        + e3 * (1.0 / 14 + 3 * e3 / 104)
        + e2 * (-0.1 + e2 / 24 - 3 * e3 / 44 - 5 * e2 * e2 / 208 + e2 * e3 / 16)
    ) / math.sqrt(a)


def carlson_rd(x: float, y: float, z: float) -> float:
    """R_D(x, y, z) = R_J(x, y, z, z)."""
    if x < 0 or y < 0 or z <= 0:
        raise DomainError("carlson_rd requires x, y >= 0 and z > 0")
    if x == 0 and y == 0:
        raise DomainError("carlson_rd: x and y may not both be zero")
    return carlson_rj(x, y, z, z)


def carlson_rc(x: float, y: float) -> float:
    """Degenerate R_C(x, y) = R_F(x, y, y), y > 0."""
    if x < 0 or y <= 0:
        raise DomainError("carlson_rc requires x >= 0, y > 0")
    if x == y:
        return 1.0 / math.sqrt(x)
    if x < y:
        return math.acos(math.sqrt(x / y)) / math.sqrt(y - x)
    return math.acosh(math.sqrt(x / y)) / math.sqrt(x - y)


def _rc_one_plus(e: float) -> float:
    # R_C(1, 1 + e), stable for small |e|
    if abs(e) < 1e-4:
        return 1.0 - e / 3.0 + e * e / 5.0 - e ** 3 / 7.0 + e ** 4 / 9.0
    if e > 0:
        s = math.sqrt(e)
        return math.atan(s) / s
    s = math.sqrt(-e)
    return math.atanh(s) / s


def carlson_rj(x: float, y: float, z: float, p: float) -> float:
    """R_J(x, y, z, p) = 3/2 int_0^inf dt / ((t+p) sqrt((t+x)(t+y)(t+z))).

    Only the circular case ``p > 0`` is supported.
    """
    if p <= 0:
        raise DomainError("carlson_rj: p must be positive (principal value not supported)")
    if x < 0 or y < 0 or z < 0:
        raise DomainError("carlson_rj requires nonnegative x, y, z")
    if (x == 0) + (y == 0) + (z == 0) >= 2:
        raise DomainError("carlson_rj: at most one of x, y, z may be zero")
    x0, y0, z0 = x, y, z
    a0 = (x + y + z + 2.0 * p) / 5.0
    delta = (p - x) * (p - y) * (p - z)
    q = _RDJ_TOL * max(abs(a0 - x), abs(a0 - y), abs(a0 - z), abs(a0 - p))
    a = a0
    fac = 1.0  # 4**-m
    total = 0.0
    while q * fac >= abs(a):
        sx, sy, sz, sp = math.sqrt(x), math.sqrt(y), math.sqrt(z), math.sqrt(p)
        lam = sx * sy + sx * sz + sy * sz
        d = (sp + sx) * (sp + sy) * (sp + sz)
        e = fac ** 3 * delta / (d * d)
        total += fac / d * _rc_one_plus(e)
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        p = 0.25 * (p + lam)
        a = 0.25 * (a + lam)
        fac *= 0.25
    X = (a0 - x0) * fac / a
    Y = (a0 - y0) * fac / a
    Z = (a0 - z0) * fac / a
    P = -(X + Y + Z) / 2.0
    e2 = X * Y + X * Z + Y * Z - 3.0 * P * P
    e3 = X * Y * Z + 2.0 * e2 * P + 4.0 * P ** 3
    e4 = (2.0 * X * Y * Z + e2 * P + 3.0 * P ** 3) * P
    e5 = X * Y * Z * P * P
    series = (
        1.0
        - 3.0 * e2 / 14.0
        + e3 / 6.0
        + 9.0 * e2 * e2 / 88.0
        - 3.0 * e4 / 22.0
        - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0
    )
    return fac * series / (a * math.sqrt(a)) + 6.0 * total


# -- complete integrals ---------------------------------------------------------


def complete_k(mod: Modulus) -> float:
    """K(k); raises :class:`DivergenceError` at k = 1."""
    if mod.mc <= 0.0:
        raise DivergenceError("K(1) = inf: complete integral diverges at k = 1")
    return carlson_rf(0.0, mod.mc, 1.0)


def complete_e(mod: Modulus) -> float:
    if mod.mc <= 0.0:
        return 1.0
    if mod.m == 0.0:
        return math.pi / 2
    return carlson_rf(0.0, mod.mc, 1.0) - mod.m / 3.0 * carlson_rd(0.0, mod.mc, 1.0)


def _complement(n: float, nc: float | None) -> float:
    nc = 1.0 - n if nc is None else float(nc)
    if nc <= 0.0:
        raise DomainError(f"Pi requires n < 1, got n={n!r}, 1-n={nc!r}")
    return nc


def complete_pi(n: float, mod: Modulus, nc: float | None = None) -> float:
    """Pi(n, k) = Pi(K(k), n, k) for n < 1.

    ``nc = 1 - n`` may be passed when known more accurately than the
    difference (n -> 1).
    """
    nc = _complement(n, nc)
    kk = complete_k(mod)
    if n == 0.0:
        return kk
    return kk + n / 3.0 * carlson_rj(0.0, mod.mc, 1.0, nc)


# -- Jacobi elliptic functions --------------------------------------------------


def _sn_cn_dn_agm(u: float, m: float, mc: float) -> tuple[float, float, float]:
    # descending Landen (A&S 16.4), u already reduced to [-2K, 2K]
    a = [1.0]
    c = [math.sqrt(m)]
    b = math.sqrt(mc)
    while abs(c[-1]) > _EPS * a[-1] and len(a) < 30:
        an, bn = a[-1], b
        a.append(0.5 * (an + bn))
        c.append(0.5 * (an - bn))
        b = math.sqrt(an * bn)
    n = len(a) - 1
    phi = (2.0 ** n) * a[-1] * u
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(c[j] / a[j] * math.sin(phi)))
    sn = math.sin(phi)
    cn = math.cos(phi)
    dn = math.sqrt(mc + m * cn * cn)
    return sn, cn, dn


def jacobi_sn_cn_dn(u: float, mod: Modulus) -> tuple[float, float, float]:
    """Return ``(sn(u,k), cn(u,k), dn(u,k))`` for real ``u`` and ``0 <= k <= 1``."""
    u = float(u)
    if mod.m == 0.0:
        return math.sin(u), math.cos(u), 1.0
    if mod.mc <= 0.0:
        sech = 1.0 / math.cosh(u) if abs(u) < 710 else 0.0
        return math.tanh(u), sech, sech
    kk = complete_k(mod)
    # sn, cn have period 4K; reducing keeps the AGM phase small
    period = 4.0 * kk
    u = u - period * math.floor(u / period + 0.5)
    return _sn_cn_dn_agm(u, mod.m, mod.mc)


# -- incomplete integrals (Jacobi argument) -----------------------------------


def _reduce(x: float, mod: Modulus) -> tuple[int, float, float, float, float]:
    kk = complete_k(mod)
    j = int(math.floor(x / (2.0 * kk) + 0.5))
    x0 = x - 2.0 * kk * j
    sn, cn, dn = jacobi_sn_cn_dn(x0, mod)
    # x0 in [-K, K] so cn >= 0; clip rounding
    return j, x0, sn, max(cn, 0.0), dn


def incomplete_e(x: float, mod: Modulus) -> float:
    """Jacobi's epsilon function E(x, k) = int_0^x dn^2(s, k) ds."""
    x = float(x)
    if x == 0.0:
        return 0.0
    if mod.m == 0.0:
        return x
    if mod.mc <= 0.0:
        return math.tanh(x)
    j, _, s, c, d = _reduce(x, mod)
    if s == 0.0:
        part = 0.0
    else:
        c2, d2 = c * c, d * d
        part = s * carlson_rf(c2, d2, 1.0) - mod.m / 3.0 * s ** 3 * carlson_rd(c2, d2, 1.0)
    return 2.0 * j * complete_e(mod) + part


def incomplete_pi(x: float, n: float, mod: Modulus, nc: float | None = None) -> float:
    """Pi(x, n, k) = int_0^x ds / (1 - n sn^2(s, k)), n < 1; ``nc`` as in :func:`complete_pi`."""
    nc = _complement(n, nc)
    x = float(x)
    if x == 0.0:
        return 0.0
    if n == 0.0:
        return x
    if mod.mc <= 0.0:
        th = math.tanh(x)
        if n > 0:
            s = math.sqrt(n)
            return (x - s * math.atanh(s * th)) / nc
        s = math.sqrt(-n)
        return (x + s * math.atan(s * th)) / nc
    if mod.m == 0.0:
        # 1 - n sin^2 s: closed form via tan
        j = int(math.floor(x / math.pi + 0.5))
        x0 = x - math.pi * j
        full = math.pi / math.sqrt(nc)
        part = math.atan(math.sqrt(nc) * math.tan(x0)) / math.sqrt(nc)
        return j * full + part
    j, _, s, c, d = _reduce(x, mod)
    if s == 0.0:
        part = 0.0
    else:
        c2, d2 = c * c, d * d
        # 1 - n s^2 = nc + n c^2 keeps digits when n -> 1
        part = s * carlson_rf(c2, d2, 1.0) + n / 3.0 * s ** 3 * carlson_rj(c2, d2, 1.0, nc + n * c2)
    return 2.0 * j * complete_pi(n, mod, nc) + part


def evaluate(kind: EllipticKind | str, mod: Modulus, x: float = 0.0, n: float = 0.0) -> EllipticEval:
    """Dispatch by kind and wrap the result with its modulus bookkeeping."""
    kind = EllipticKind(kind)
    if kind is EllipticKind.K:
        value = complete_k(mod)
    elif kind is EllipticKind.E_COMPLETE:
        value = complete_e(mod)
    elif kind is EllipticKind.PI_COMPLETE:
        value = complete_pi(n, mod)
    elif kind is EllipticKind.E_INCOMPLETE:
        value = incomplete_e(x, mod)
    elif kind is EllipticKind.PI_INCOMPLETE:
        value = incomplete_pi(x, n, mod)
    else:
        sn, cn, dn = jacobi_sn_cn_dn(x, mod)
        value = {EllipticKind.SN: sn, EllipticKind.CN: cn, EllipticKind.DN: dn}[kind]
    return EllipticEval(value, mod, kind)
