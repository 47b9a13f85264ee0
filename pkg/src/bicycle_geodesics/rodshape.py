"""Kirchhoff-rod structure of geodesic front tracks.

Curvature and torsion are read algebraically off the phase state:

    kappa^2 = |r|^2 - b^2,        kappa^2 (2 tau - b) = b (a^2 - 1),

with the binormal from ``kappa B = -b T - K``, ``K = r x v``.  Nothing here
finite-differences positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import IntegrationOptions, PhaseState, SampledPath, acceleration, integrate, magnetic_data
from .elliptic import complete_k
from .errors import DegenerateError, NotApplicableError, SolitonError
from .params import GeodesicParams

# |a - 1| below this is treated as the constant-torsion family
A_ONE_TOL = 1e-9
EVENT_TOL = 1e-12
# on the a = 1 family, |kappa| below this takes its frame from the nearest inflection
INFLECTION_ZONE = 1e-3


@dataclass(frozen=True)
class FrenetSample:
    t: float
    kappa: float
    tau: float
    kappa_prime: float
    T: np.ndarray
    N: np.ndarray
    B_vec: np.ndarray
    F: float
    G: float


@dataclass(frozen=True)
class FrenetSeries:
    """Frenet data along a sampled path, arrays indexed like ``path.t``."""

    t: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    kappa_prime: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B_vec: np.ndarray
    F: np.ndarray
    G: np.ndarray

    def sample(self, i: int) -> FrenetSample:
        return FrenetSample(
            float(self.t[i]), float(self.kappa[i]), float(self.tau[i]),
            float(self.kappa_prime[i]), self.T[i], self.N[i], self.B_vec[i],
            float(self.F[i]), float(self.G[i]),
        )


@dataclass(frozen=True)
class KirchhoffParams:
    a1: float
    a2: float
    a3: float
    a4: float

    def rescaled(self, lam: float) -> "KirchhoffParams":
        """Parameters of the curve scaled by ``lam``."""
        return KirchhoffParams(
            self.a1 / lam ** 2, self.a2 / lam, self.a3 / lam ** 3, self.a4 / lam ** 2
        )


@dataclass(frozen=True)
class CubicData:
    """The cubic P(u) with (u')^2 = P(u), u = kappa^2."""

    roots: tuple[float, float, float]
    coeffs: tuple[float, float, float, float]  # highest degree first

    def __call__(self, u):
        c3, c2, c1, c0 = self.coeffs
        return ((c3 * u + c2) * u + c1) * u + c0


@dataclass(frozen=True)
class CurvatureEvent:
    t: float
    kind: str  # "max" or "min"
    kappa_sq: float


# -- pointwise -------------------------------------------------------------------


def _tau(kappa_sq, params: GeodesicParams):
    a, b = params.a, params.b
    if abs(a - 1.0) < A_ONE_TOL:
        return np.full_like(np.asarray(kappa_sq, float), b / 2.0)
    return b / 2.0 + b * (a * a - 1.0) / (2.0 * np.asarray(kappa_sq, float))


def _third_derivative(s: PhaseState) -> np.ndarray:
    # x''' = r'' from differentiating r' = (v.p) r - [r.(r+p)] v
    v, p, r = s.v, s.p, s.r
    vp = v @ p
    rr = r @ (r + p)
    dv = p + r - vp * v
    dr = vp * r - rr * v
    return (dv @ p) * r + vp * dr - (dr @ (2 * r + p)) * v - rr * dv


def _propagate(s: PhaseState, dt: float) -> PhaseState:
    if dt == 0.0:
        return s
    opts = IntegrationOptions(rel_tol=1e-13, abs_tol=1e-15, dt_out=abs(dt), first_step=min(abs(dt), 1e-2))
    path = integrate(s, s.t + dt, opts)
    return path.state(len(path) - 1)


def _inflection_binormal(s: PhaseState, params: GeodesicParams) -> np.ndarray:
    """Binormal near an inflection of an a = 1 track.

    W = kappa B loses its direction as kappa -> 0, so the frame is taken at
    the inflection itself (a simple root of v . p, where x''' = kappa' N)
    and carried back to ``s`` with the third-order Frenet expansion.
    """
    tau = params.b / 2.0
    p2 = float(s.p @ s.p)
    delta = 0.0
    s0 = s
    for _ in range(8):
        g = float(s0.v @ s0.p)
        dg = p2 + float(s0.r @ s0.p) - g * g
        step = -g / dg
        delta += step
        s0 = _propagate(s, delta)
        if abs(step) < 1e-14:
            break
    x3 = _third_derivative(s0)
    k1 = float(np.linalg.norm(x3))
    N0 = x3 / k1
    T0 = s0.velocity
    B0 = np.cross(T0, N0)
    d = -delta
    Bv = (B0 - d * tau * N0 - 0.5 * d * d * tau * tau * B0
          + d ** 3 / 6.0 * (tau * k1 * T0 + tau ** 3 * N0))
    T = s.velocity
    Bv = Bv - (Bv @ T) * T
    return Bv / np.linalg.norm(Bv)


def curvature_torsion(s: PhaseState, params: GeodesicParams, sign: float = 1.0) -> FrenetSample:
    """Frenet data at one state; ``sign`` selects the frame branch (only
    meaningful at a = 1, where kappa changes sign at inflections)."""
    b = params.b
    T = s.velocity
    W = -b * T - np.cross(s.r, s.v)
    kappa_sq = float(s.r @ s.r) - b * b
    if kappa_sq + b * b <= 1e-28:
        raise DegenerateError("kappa^2 + b^2 = 0: front track is linear here")
    kappa_sq = max(kappa_sq, 0.0)
    mag = math.sqrt(kappa_sq)
    if abs(params.a - 1.0) < A_ONE_TOL and mag < INFLECTION_ZONE and b != 0.0:
        Bv = sign * _inflection_binormal(s, params)
        kappa = float(W @ Bv)
    else:
        kappa = sign * mag
        if mag > 1e-10:
            Wp = W - (W @ T) * T
            Bv = sign * Wp / np.linalg.norm(Wp)
        else:
            # inflection: frame extends via x'''
            x3 = _third_derivative(s)
            N = sign * x3 / np.linalg.norm(x3)
            Bv = np.cross(T, N)
    N = np.cross(Bv, T)
    tau = float(_tau(kappa_sq if kappa_sq > 0 else 1.0, params))
    return FrenetSample(
        float(s.t), kappa, tau, -float(s.p @ N), T, N, Bv,
        float(s.v @ T), float(s.p @ T),
    )


def frenet_series(path: SampledPath, params: GeodesicParams | None = None) -> FrenetSeries:
    """Frenet data at every sample.

    At a = 1 the curvature sign follows the binormal continuously: positive
    at the first sample, flipping together with (N, B) at each inflection.
    """
    params = params or path.params()
    b = params.b
    T = path.velocity
    r, v, p = path.r, path.v, path.p_all
    K = np.cross(r, v)
    kappa_sq = np.maximum(np.einsum("ij,ij->i", r, r) - b * b, 0.0)
    if np.any(kappa_sq + b * b <= 1e-28):
        raise DegenerateError("kappa^2 + b^2 = 0 at some sample: linear front track")
    W = -b * T - K  # = kappa B, smooth through inflections
    mag = np.sqrt(kappa_sq)
    a_one = abs(params.a - 1.0) < A_ONE_TOL and b != 0.0
    small = mag < (INFLECTION_ZONE if a_one else 1e-10)
    Bv = np.empty_like(W)
    # normalize W itself: |W|^2 = kappa^2 only up to the drift in b
    Wp = W - np.einsum("ij,ij->i", W, T)[:, None] * T
    Bv[~small] = Wp[~small] / np.linalg.norm(Wp[~small], axis=1)[:, None]
    for i in np.flatnonzero(small):
        if a_one:
            # unsigned branch, as W / |W| would give with exact data
            Bi = _inflection_binormal(path.state(i), params)
            kw = float(W[i] @ Bi)
            Bv[i] = Bi if kw >= 0 else -Bi
            mag[i] = abs(kw)
        else:
            Bv[i] = curvature_torsion(path.state(i), params).B_vec
    sign = np.ones(len(path))
    if a_one:
        flips = np.einsum("ij,ij->i", Bv[1:], Bv[:-1]) < 0
        sign[1:] = np.where(np.cumsum(flips) % 2 == 1, -1.0, 1.0)
        Bv = sign[:, None] * Bv
    kappa = sign * mag
    N = np.cross(Bv, T)
    tau = _tau(np.where(small, 1.0, kappa_sq), params)
    kappa_prime = -np.einsum("ij,ij->i", p, N)
    F = np.einsum("ij,ij->i", v, T)
    G = np.einsum("ij,ij->i", p, T)
    return FrenetSeries(path.t.copy(), kappa, tau, kappa_prime, T, N, Bv, F, G)


# -- parameter-level ----------------------------------------------------------------


def kappa_sq_polynomial(a: float, b: float) -> CubicData:
    roots = (-b * b, (1.0 - a) ** 2, (1.0 + a) ** 2)
    c = -np.poly(roots)  # leading coefficient of P is -1
    return CubicData(roots, tuple(float(x) for x in c))


def ranges(a: float, b: float) -> tuple[float, float, float, float]:
    """(kappa_min, kappa_max, tau_min, tau_max) over a period.

    Torsion bounds are the images of the curvature extremes under
    kappa^2 (2 tau - b) = b (a^2 - 1).
    """
    if a == 1.0 and b == 0.0:
        raise SolitonError("soliton: aperiodic curvature")
    if a == 1.0:
        return -2.0, 2.0, b / 2.0, b / 2.0
    kmin, kmax = abs(1.0 - a), 1.0 + a
    at_max = a * b / (1.0 + a)
    at_min = a * b / (a - 1.0)
    return kmin, kmax, min(at_max, at_min), max(at_max, at_min)


def period(params: GeodesicParams) -> tuple[float, float]:
    """(period of kappa^2, period of kappa)."""
    if params.k.mc <= 0.0:
        raise SolitonError("soliton: aperiodic (K(1) = inf)")
    T = 2.0 * complete_k(params.k) / params.omega
    return T, (2.0 * T if abs(params.a - 1.0) < A_ONE_TOL else T)


def kirchhoff_params(a: float, b: float) -> KirchhoffParams:
    return KirchhoffParams((1.0 + a * a) / 2.0, b, b * (a * a - 1.0), math.sqrt(a * a + b * b))


# -- path-level -------------------------------------------------------------------


def _f_values(path: SampledPath, t) -> np.ndarray:
    st = path.states_at(t)
    return np.einsum("ij,ij->i", st[:, 3:6], st[:, 6:9])


def kappa_extrema(path: SampledPath, params: GeodesicParams | None = None) -> list[CurvatureEvent]:
    """Critical points of kappa^2, located on the dense output.

    (kappa^2)' = 2 (v . x')(kappa^2 + b^2) and v . x' = v . p, so the events
    are sign changes of v . p, refined by bisection to 1e-12 in t.
    """
    params = params or path.params()
    mid = 1.0 + params.a ** 2
    f = np.einsum("ij,ij->i", path.v, path.p_all)
    events = []
    for i in range(len(path) - 1):
        lo, hi = float(path.t[i]), float(path.t[i + 1])
        flo, fhi = f[i], f[i + 1]
        if flo == 0.0 and i > 0:
            continue
        if flo == 0.0:
            t_ev = lo
        elif flo * fhi < 0.0:
            while abs(hi - lo) > EVENT_TOL:
                m = 0.5 * (lo + hi)
                fm = _f_values(path, [m])[0]
                if fm == 0.0:
                    lo = hi = m
                    break
                if (fm < 0) == (flo < 0):
                    lo, flo = m, fm
                else:
                    hi = m
            t_ev = 0.5 * (lo + hi)
        else:
            continue
        st = path.states_at([t_ev])[0]
        ksq = float(st[9:12] @ st[9:12]) - params.b ** 2
        events.append(CurvatureEvent(t_ev, "max" if ksq > mid else "min", ksq))
    return events


def back_frame_events(path: SampledPath, params: GeodesicParams | None = None):
    """(t, v, |v + x''/(1+a)|) at every curvature maximum."""
    params = params or path.params()
    out = []
    for ev in kappa_extrema(path, params):
        if ev.kind != "max":
            continue
        st = path.states_at([ev.t])
        v = st[0, 3:6]
        acc = acceleration(st)[0]
        out.append((ev.t, v, float(np.linalg.norm(v + acc / (1.0 + params.a)))))
    return out


def back_frame_at_kappa_max(path: SampledPath, tol: float = 1e-7) -> np.ndarray:
    """Frame direction v at the first curvature maximum, where v = -x''/(1+a).

    This pins the back track of a non-linear front track.
    """
    params = path.params()
    kappa_sq = np.einsum("ij,ij->i", path.r, path.r) - params.b ** 2
    if np.max(np.abs(kappa_sq)) < 1e-12:
        raise NotApplicableError("linear front track: back track not determined")
    if params.a == 0.0:
        # unit circle: every point is a maximum
        v = path.v[0]
        acc = acceleration(path.states()[:1])[0]
        res = float(np.linalg.norm(v + acc))
    else:
        events = back_frame_events(path, params)
        if not events:
            raise NotApplicableError("no curvature maximum inside the path")
        _, v, res = events[0]
    if res > tol:
        raise DegenerateError(f"back-frame relation violated: residual {res:.3e}")
    return np.array(v)


def min_frame_residual(path: SampledPath, params: GeodesicParams | None = None) -> list[float]:
    """|(a-1) v - x''| at curvature minima (a != 1)."""
    params = params or path.params()
    out = []
    for ev in kappa_extrema(path, params):
        if ev.kind != "min":
            continue
        st = path.states_at([ev.t])
        out.append(float(np.linalg.norm((params.a - 1.0) * st[0, 3:6] - acceleration(st)[0])))
    return out


def closedness_check(params: GeodesicParams, path: SampledPath | None = None) -> bool:
    """True only for the unit-circle family (a = 0).

    For a > 0 with a path, also confirms that the drift along p over one
    period is nonzero.
    """
    if params.a == 0.0:
        return True
    if params.is_soliton or path is None:
        return False
    T = params.period_T
    t0 = float(path.t[0])
    st = path.states_at([t0, t0 + T])
    dz = float(_axis_dir(path) @ (st[1, 0:3] - st[0, 0:3]))
    if dz <= 0.0:
        raise DegenerateError(f"expected positive axial drift, got {dz}")
    return False


def _axis_dir(path: SampledPath) -> np.ndarray:
    return path.p / np.linalg.norm(path.p)


def axial_drift(params: GeodesicParams, path: SampledPath) -> float:
    """Displacement along p/|p| over one period of kappa^2."""
    t0 = float(path.t[0])
    st = path.states_at([t0, t0 + params.period_T])
    return float(_axis_dir(path) @ (st[1, 0:3] - st[0, 0:3]))


# -- structural residuals ------------------------------------------------------------


@dataclass(frozen=True)
class StructureResiduals:
    p_reconstruction: np.ndarray  # |p_frenet - p|
    energy: np.ndarray
    torsion: np.ndarray  # nan where kappa^2 <= 1e-6
    radial: np.ndarray
    two_G: np.ndarray


def structure_residuals(path: SampledPath, series: FrenetSeries | None = None,
                        params: GeodesicParams | None = None) -> StructureResiduals:
    """Pointwise residuals of the rod relations along a path."""
    params = params or path.params()
    series = series or frenet_series(path, params)
    a, b = params.a, params.b
    k, kp, tau = series.kappa, series.kappa_prime, series.tau
    c = (1.0 + a * a - k * k) / 2.0
    p_rec = c[:, None] * series.T - kp[:, None] * series.N - (k * (tau - b))[:, None] * series.B_vec
    p_err = np.linalg.norm(p_rec - path.p_all, axis=1)
    energy = kp ** 2 + c ** 2 + k ** 2 * (tau - b) ** 2 - (a * a + b * b)
    ksq = k * k
    tors = np.where(ksq > 1e-6, ksq * (2 * tau - b) - b * (a * a - 1.0), np.nan)
    p2 = a * a + b * b
    if p2 > 0:
        md = magnetic_data(path.state(0))
        axis = path.p / np.linalg.norm(path.p)
        rel = path.x - md.K_axis_point
        radial_vec = rel - np.outer(rel @ axis, axis)
        rad2 = np.einsum("ij,ij->i", radial_vec, radial_vec)
        radial = b * b + ksq - (rad2 * p2 + b * b / p2)
    else:
        radial = np.full(len(path), np.nan)
    two_G = 2.0 * series.G - (1.0 + a * a - ksq)
    return StructureResiduals(p_err, energy, tors, radial, two_G)
