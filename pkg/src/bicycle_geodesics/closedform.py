"""Closed-form geodesics in terms of Jacobi elliptic functions.

Time zero is a curvature maximum.  Cylindrical coordinates (r, theta, z)
are taken about the Killing-field axis, oriented along +p, with
theta(0) = z(0) = 0:

    kappa^2(t) = (1+a)^2 - 4a sn^2(w t, k)
    r(t)       = sqrt(A - 4a sn^2(w t, k)) / |p|
    theta(t)   = b / (2|p|) [t + (B/w) Pi(w t, n, k)]
    z(t)       = [(|p|^2 + 1) t - 4 w E(w t, k)] / (2|p|)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from .dynamics import PhaseState, magnetic_data
from .elliptic import complete_e, complete_k, complete_pi, incomplete_e, incomplete_pi, jacobi_sn_cn_dn
from .errors import CircleBranchError, DegenerateError, NearSingularCharacteristic, SolitonError
from .params import GeodesicParams
from .screw import ScrewMotion

# below this 1 - n the track passes within ~|B| of the axis; Pi is still evaluated
# with the exact complement B^2, and B = 0 takes the one-sided limit
N_GUARD = 1e-6


@dataclass(frozen=True)
class CylindricalSample:
    t: float
    r: float
    theta: float  # unwound
    z: float


def _sn(t: float, params: GeodesicParams) -> float:
    return jacobi_sn_cn_dn(params.omega * t, params.k)[0]


def kappa_sq_closed(t, params: GeodesicParams):
    """kappa^2 at time(s) ``t``; the soliton uses sn = tanh."""
    a = params.a
    f = np.vectorize(lambda s: (1 + a) ** 2 - 4 * a * _sn(s, params) ** 2, otypes=[float])
    out = f(np.asarray(t, float))
    return float(out) if out.ndim == 0 else out


def kappa_closed(t, params: GeodesicParams):
    """Signed curvature: 2 cn(w t, k) on the a = 1 family, else the positive root."""
    if params.a == 1.0:
        f = np.vectorize(lambda s: 2.0 * jacobi_sn_cn_dn(params.omega * s, params.k)[1], otypes=[float])
        out = f(np.asarray(t, float))
        return float(out) if out.ndim == 0 else out
    return np.sqrt(np.maximum(kappa_sq_closed(t, params), 0.0))


def tau_closed(t, params: GeodesicParams):
    a, b = params.a, params.b
    if a == 1.0:
        return np.full_like(np.asarray(t, float), b / 2.0) + 0.0
    return b / 2.0 + b * (a * a - 1.0) / (2.0 * kappa_sq_closed(t, params))


def _check_axis(params: GeodesicParams):
    if params.p_norm == 0.0:
        raise CircleBranchError("p = 0: no Killing axis (unit circle about a fixed back wheel)")


def theta_rate(t: float, params: GeodesicParams) -> float:
    """d theta / dt; integrating it over [0, t] reproduces theta_closed off the axis."""
    # |p| theta' = (b/2) [1 + B / (1 - n sn^2)]
    sn2 = _sn(t, params) ** 2
    denom = params.one_minus_n + params.n * (1.0 - sn2)
    return params.b / (2 * params.p_norm) * (1.0 + params.B / denom)


def _warn_guard(params: GeodesicParams):
    warnings.warn(f"1 - n = {params.one_minus_n:.1e}: the track passes close to the axis",
                  NearSingularCharacteristic, stacklevel=3)


def _axis_jump(params: GeodesicParams) -> float:
    # lim_{B -> 0+} of B Pi over one crossing of the axis
    return math.pi / (math.sqrt(params.n) * math.sqrt(params.k.mc))


def _b_pi(u: float, params: GeodesicParams) -> float:
    """B * Pi(u, n, k), with the B -> 0+ limit on the locus a^2 + b^2 = a."""
    if params.one_minus_n < N_GUARD:
        _warn_guard(params)
    if params.B != 0.0:
        return params.B * incomplete_pi(u, params.n, params.k, params.one_minus_n)
    # the track meets the axis at u = (2j+1) K, where theta jumps
    K = complete_k(params.k)
    crossings = math.floor((abs(u) / K + 1.0) / 2.0)
    return math.copysign(crossings * _axis_jump(params), u)


def theta_closed(t: float, params: GeodesicParams) -> float:
    _check_axis(params)
    if params.b == 0.0:
        return 0.0
    w = params.omega
    return params.b / (2 * params.p_norm) * (t + _b_pi(w * t, params) / w)


def cylindrical_track(t: float, params: GeodesicParams) -> CylindricalSample:
    _check_axis(params)
    a, p = params.a, params.p_norm
    w = params.omega
    sn2 = _sn(t, params) ** 2
    r = math.sqrt(max(params.A - 4 * a * sn2, 0.0)) / p
    z = ((p * p + 1) * t - 4 * w * incomplete_e(w * t, params.k)) / (2 * p)
    return CylindricalSample(float(t), r, theta_closed(t, params), z)


def front_track_cartesian(t: float, params: GeodesicParams) -> np.ndarray:
    """Front wheel in the axis frame: axis = z-axis, x(0) on the positive x-axis."""
    c = cylindrical_track(t, params)
    return np.array([c.r * math.cos(c.theta), c.r * math.sin(c.theta), c.z])


def front_track_array(ts, params: GeodesicParams) -> np.ndarray:
    return np.array([front_track_cartesian(float(t), params) for t in ts])


def monodromy_angles(params: GeodesicParams) -> tuple[float, float]:
    """(signed delta_theta, delta_z) over one period of kappa^2."""
    _check_axis(params)
    if params.k.mc <= 0.0:
        raise SolitonError("soliton: aperiodic (K(1) = inf)")
    b, p, w = params.b, params.p_norm, params.omega
    K = complete_k(params.k)
    if b == 0.0:
        dtheta = 0.0
    else:
        if params.one_minus_n < N_GUARD:
            _warn_guard(params)
        if params.B != 0.0:
            b_pi = params.B * complete_pi(params.n, params.k, params.one_minus_n)
        else:
            b_pi = 0.5 * _axis_jump(params)
        dtheta = b / (w * p) * (K + b_pi)
    dz = ((p * p + 1) * K - 4 * w * w * complete_e(params.k)) / (w * p)
    return dtheta, dz


def monodromy_closed(params: GeodesicParams, state: PhaseState | None = None) -> ScrewMotion:
    """Screw motion x(t) -> x(t + T).

    Without ``state`` the axis is the z-axis of the axis frame; with a
    state the axis is the Killing axis through x1 along p/|p| in world
    coordinates.
    """
    dtheta, dz = monodromy_angles(params)
    if state is None:
        point, direction = np.zeros(3), np.array([0.0, 0.0, 1.0])
    else:
        md = magnetic_data(state)
        direction = md.p / np.linalg.norm(md.p)
        point = md.K_axis_point
    return ScrewMotion.from_signed(point, direction, dtheta, dz)


def axis_frame(state: PhaseState) -> tuple[np.ndarray, np.ndarray]:
    """(origin, rows) such that ``(q - origin) @ rows.T`` expresses a world
    point in the axis frame anchored at ``state`` (assumed at a curvature
    maximum, i.e. closed-form time zero)."""
    md = magnetic_data(state)
    e3 = md.p / np.linalg.norm(md.p)
    rel = state.x - md.K_axis_point
    origin = md.K_axis_point + (rel @ e3) * e3
    radial = state.x - origin
    nr = np.linalg.norm(radial)
    if nr < 1e-14:
        # track passes through the axis; any perpendicular reference works
        trial = np.array([1.0, 0.0, 0.0]) if abs(e3[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        radial = trial - (trial @ e3) * e3
        nr = np.linalg.norm(radial)
    e1 = radial / nr
    e2 = np.cross(e3, e1)
    return origin, np.vstack([e1, e2, e3])


def front_derivatives(t: float, params: GeodesicParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x, x', x'') of the closed-form front track in the axis frame."""
    _check_axis(params)
    a, b, p, w = params.a, params.b, params.p_norm, params.omega
    sn, cn, dn = jacobi_sn_cn_dn(w * t, params.k)
    m = params.k.m
    c = cylindrical_track(t, params)
    rho, th = c.r, c.theta
    if rho == 0.0:
        raise DegenerateError("front track meets the axis: cylindrical derivatives undefined")
    scd = sn * cn * dn
    d_scd = cn * cn * dn * dn - sn * sn * dn * dn - m * sn * sn * cn * cn
    rho2_1 = -8.0 * a * w * scd / (p * p)
    rho2_2 = -8.0 * a * w * w * d_scd / (p * p)
    rho1 = rho2_1 / (2 * rho)
    rho_2 = (rho2_2 - 2 * rho1 * rho1) / (2 * rho)
    if b == 0.0:
        th1 = th2 = 0.0
    else:
        q = params.one_minus_n + params.n * (1.0 - sn * sn)
        th1 = b / (2 * p) * (1.0 + params.B / q)
        th2 = b / (2 * p) * params.B * params.n * 2 * w * scd / (q * q)
    z1 = ((p * p + 1) - 4 * w * w * dn * dn) / (2 * p)
    z2 = 4 * w ** 3 * m * scd / p
    e_r = np.array([math.cos(th), math.sin(th), 0.0])
    e_t = np.array([-math.sin(th), math.cos(th), 0.0])
    e_z = np.array([0.0, 0.0, 1.0])
    x = rho * e_r + c.z * e_z
    x1 = rho1 * e_r + rho * th1 * e_t + z1 * e_z
    x2 = (rho_2 - rho * th1 * th1) * e_r + (2 * rho1 * th1 + rho * th2) * e_t + z2 * e_z
    return x, x1, x2


def back_track_cartesian(t: float, params: GeodesicParams) -> np.ndarray:
    """Back wheel x - v in the axis frame.

    With r = x' - p and p = |p| e_z, the equations of motion give
    v . p = -(x'' . p)/|r|^2 and v = ((v . p) r - x'')/(r . x').
    """
    x, x1, x2 = front_derivatives(t, params)
    p = np.array([0.0, 0.0, params.p_norm])
    r = x1 - p
    g = -(x2 @ p) / (r @ r)
    v = (g * r - x2) / (r @ x1)
    return x - v / np.linalg.norm(v)
