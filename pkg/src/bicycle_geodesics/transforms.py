"""Symmetries of bicycle geodesics and numerical monodromy.

The bicycle correspondence swaps the front wheel with its reflection
through the back wheel: (x, v) -> (x - 2v, -v).  It maps geodesics to
geodesics with the same p, a and b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .closedform import kappa_sq_closed, monodromy_angles, tau_closed
from .dynamics import SampledPath
from .rodshape import frenet_series
from .errors import DomainError, ExtractionError, NotApplicableError
from .params import GeodesicParams
from .screw import RigidMotion, ScrewMotion, angle_distance, screw_from_rigid, wrap_angle

N_PAIRS = 16
FIT_TOL = 1e-7
AXIS_TOL = 1e-6
COMPOSE_TOL = 1e-6
CONJECTURE_TOL = 1e-4
SHIFT_TOL = 1e-8


def flip(x, v) -> tuple[np.ndarray, np.ndarray]:
    """(x, v) -> (x - 2v, -v).  The back wheel x - v is unchanged."""
    x = np.asarray(x, float)
    v = np.asarray(v, float)
    return x - 2.0 * v, -v


def flip_states(states: np.ndarray) -> np.ndarray:
    """Flip full phase states row-wise; p is kept and r re-derived from x'."""
    Y = np.atleast_2d(np.asarray(states, float))
    x, v, p, r = Y[:, 0:3], Y[:, 3:6], Y[:, 6:9], Y[:, 9:12]
    xd = p + r
    vp = np.einsum("ij,ij->i", v, p)
    vd = xd - vp[:, None] * v
    xd_new = xd - 2.0 * vd
    return np.hstack([x - 2.0 * v, -v, p, xd_new - p])


class FlippedDense:
    """Dense output of a path, seen through the correspondence."""

    def __init__(self, dense):
        self.base = dense

    @property
    def t_span(self):
        return self.base.t_span

    def covers(self, t) -> bool:
        return self.base.covers(t)

    def states(self, t) -> np.ndarray:
        return flip_states(self.base.states(t))


def flip_path(path: SampledPath) -> SampledPath:
    """Pointwise image of a sampled geodesic under the correspondence."""
    dense = FlippedDense(path.dense) if path.dense is not None else None
    return SampledPath.from_states(path.t, flip_states(path.states()), dense, path.step_drift)


def reflect_params(a: float, b: float) -> tuple[float, float]:
    """Parameters of the mirror image: torsion and b change sign."""
    return a, -b


@dataclass(frozen=True)
class TorsionShift:
    params: GeodesicParams
    scale: float
    kappa_residual: float
    tau_residual: float


def torsion_shift_rescale(params: GeodesicParams, n_samples: int = 200) -> TorsionShift:
    """Partner geodesic under a -> 1/a.

    The partner's curvature and torsion are kappa(t/a)/a and
    tau(t/a)/a - b/a.  With torsion tied to b through
    kappa^2 (2 tau - b) = b (a^2 - 1), that pair belongs to the
    parameters (1/a, -b/a).  Both relations are checked on samples of the
    closed forms.
    """
    a, b = params.a, params.b
    if a <= 0.0:
        raise DomainError("a = 0: the circle has no partner under a -> 1/a")
    partner = GeodesicParams.from_ab(1.0 / a, -b / a)
    span = 2.0 * partner.period_T if math.isfinite(partner.period_T) else 8.0
    t = np.linspace(-span, span, n_samples)
    k_res = np.max(np.abs(kappa_sq_closed(t, partner) - kappa_sq_closed(t / a, params) / (a * a)))
    tau_res = np.max(np.abs(tau_closed(t, partner) - (tau_closed(t / a, params) / a - b / a)))
    if k_res > SHIFT_TOL or tau_res > SHIFT_TOL:
        raise ExtractionError(f"torsion-shift relations off by {max(k_res, tau_res):.2e}")
    return TorsionShift(partner, a, float(k_res), float(tau_res))


def kappa_shift_residual(path: SampledPath, params: GeodesicParams | None = None) -> float:
    """max |kappa_flipped(t + T/2) - kappa(t)| over the samples with t + T/2 in range."""
    params = params or path.params()
    _require_periodic(params)
    T = params.period_T
    t1 = float(path.t[-1])
    keep = path.t + T / 2 <= t1
    if np.count_nonzero(keep) < 2:
        raise DomainError("path shorter than half a period")
    ts = path.t[keep] + T / 2
    shifted = SampledPath.from_states(ts, flip_states(path.states_at(ts)))
    k_flip = frenet_series(shifted, params).kappa
    k0 = frenet_series(path, params).kappa[keep]
    return float(np.max(np.abs(k_flip - k0)))


# -- rigid registration ---------------------------------------------------------


def register(src: np.ndarray, dst: np.ndarray) -> tuple[RigidMotion, float]:
    """Least-squares proper rigid motion taking ``src`` onto ``dst``
    (orthogonal Procrustes); returns (motion, RMS residual)."""
    src = np.asarray(src, float)
    dst = np.asarray(dst, float)
    cs, cd = src.mean(axis=0), dst.mean(axis=0)
    H = (src - cs).T @ (dst - cd)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T)) or 1.0
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    M = RigidMotion(R, cd - R @ cs)
    rms = float(np.sqrt(np.mean(np.sum((M.apply(src) - dst) ** 2, axis=1))))
    return M, rms


def _require_periodic(params: GeodesicParams):
    if params.p_norm == 0.0 or params.a == 0.0:
        raise NotApplicableError("circle: monodromy is not defined")
    if params.is_soliton:
        raise NotApplicableError("soliton: aperiodic")


def _sample_times(path: SampledPath, T: float, shift: float) -> np.ndarray:
    """Generic sample times over one period, all with t + shift in range."""
    if path.dense is None:
        raise NotApplicableError("path has no dense output")
    t0, t1 = float(path.t[0]), float(path.t[-1])
    if t1 - t0 < (T + shift) * (1 - 1e-12):
        raise DomainError(f"path covers {t1 - t0:g}, needs {T + shift:g}")
    window = min(T, t1 - t0 - shift)
    u = (np.arange(N_PAIRS) + 0.5) / N_PAIRS
    u = u + 0.1 * np.sin(7.0 * u) / N_PAIRS
    return t0 + u * window


def _points(states: np.ndarray) -> np.ndarray:
    x, v = states[:, 0:3], states[:, 3:6]
    return np.vstack([x, x - v])


def _to_screw(M: RigidMotion, rms: float, p: np.ndarray, planar: bool) -> ScrewMotion:
    if rms > FIT_TOL:
        raise ExtractionError(f"registration RMS {rms:.2e} exceeds {FIT_TOL:g}")
    p_hat = p / np.linalg.norm(p)
    sm = screw_from_rigid(M, orient=p_hat, angle_tol=1e-8 if planar else 1e-12)
    off_axis = float(np.linalg.norm(np.cross(sm.axis_dir, p_hat)))
    if sm.delta_theta == 0.0:
        t = M.translation
        off_axis = float(np.linalg.norm(t - (t @ p_hat) * p_hat))
    if off_axis > AXIS_TOL:
        raise ExtractionError(f"screw axis deviates from p by {off_axis:.2e}")
    return replace(sm, residual=rms)


def extract_monodromy(path: SampledPath, params: GeodesicParams | None = None) -> ScrewMotion:
    """Screw motion M with x(t+T) = M x(t) and y(t+T) = M y(t), fitted
    on front and back wheel samples."""
    params = params or path.params()
    _require_periodic(params)
    T = params.period_T
    t = _sample_times(path, T, T)
    src = _points(path.states_at(t))
    dst = _points(path.states_at(t + T))
    M, rms = register(src, dst)
    return _to_screw(M, rms, path.p, params.b == 0.0)


def _test_points() -> np.ndarray:
    return np.array([[1.0, 2.0, 3.0], [-4.0, 0.5, 2.0], [3.0, -6.0, -1.0], [0.0, 5.0, -7.0]])


def half_monodromy(path: SampledPath, params: GeodesicParams | None = None,
                   M: ScrewMotion | None = None) -> ScrewMotion:
    """Isometry I with flipped(t + T/2) = I(original(t)); checks I^2 = M."""
    params = params or path.params()
    _require_periodic(params)
    if params.b == 0.0:
        raise NotApplicableError("planar geodesic: the square-root isometry is not considered")
    T = params.period_T
    t = _sample_times(path, T, T / 2)
    src = _points(path.states_at(t))
    dst = _points(flip_states(path.states_at(t + T / 2)))
    I_rigid, rms = register(src, dst)
    I = _to_screw(I_rigid, rms, path.p, False)
    M = M or extract_monodromy(path, params)
    q = _test_points()
    I2 = I_rigid.compose(I_rigid)
    dev = float(np.max(np.linalg.norm(I2.apply(q) - M.to_rigid().apply(q), axis=1)))
    if dev > COMPOSE_TOL:
        raise ExtractionError(f"I^2 differs from M by {dev:.2e}")
    return I


@dataclass(frozen=True)
class ConjectureReport:
    angle_I: float
    matches: bool
    expected: float
    other_branch: float
    deviation: float


def conjecture_check(path: SampledPath, params: GeodesicParams | None = None,
                     tol: float = CONJECTURE_TOL) -> ConjectureReport:
    """Compare the rotation angle of I with dtheta/2 + pi (mod 2 pi).

    dtheta is the unreduced closed-form monodromy angle; I^2 = M only
    fixes the angle of I up to pi, so the alternative dtheta/2 is reported
    as ``other_branch``.  The outcome is evidence, not proof.
    """
    params = params or path.params()
    if params.b == 0.0:
        raise NotApplicableError("planar geodesic: the conjecture assumes b != 0")
    I = half_monodromy(path, params)
    dtheta, _ = monodromy_angles(params)
    expected = wrap_angle(dtheta / 2 + math.pi)
    dev = angle_distance(I.delta_theta, expected)
    return ConjectureReport(I.delta_theta, dev <= tol, expected, wrap_angle(dtheta / 2), dev)
