"""Phase-space integration of the bicycle geodesic equations.

The normal geodesic flow on the cotangent bundle of Q = R^3 x S^2, in the
constrained coordinates (x, v, p, r) with |v| = 1 and r . v = 0:

    x' = p + r
    v' = p + r - (v . p) v
    p' = 0
    r' = (v . p) r - [r . (r + p)] v

``x`` is the front wheel, ``y = x - v`` the back wheel.  All paths are
parametrized by front-track arc length (|p + r| = 1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _dopri
from .errors import CircleBranchError, DomainError, IntegrationError, NotApplicableError
from .params import GeodesicParams

log = logging.getLogger(__name__)

Vec3 = np.ndarray

_CHUNK = 4096


def _vec(a) -> np.ndarray:
    out = np.array(a, dtype=float).reshape(3)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PhaseState:
    """A point (x, v, p, r) of the constrained cotangent system at time t."""

    x: Vec3
    v: Vec3
    p: Vec3
    r: Vec3
    t: float = 0.0

    def __post_init__(self):
        for name in ("x", "v", "p", "r"):
            object.__setattr__(self, name, _vec(getattr(self, name)))
        if not np.all(np.isfinite(self.as_array())):
            raise DomainError("phase state has non-finite components")

    @classmethod
    def from_array(cls, y, t: float = 0.0) -> "PhaseState":
        y = np.asarray(y, dtype=float)
        return cls(y[0:3], y[3:6], y[6:9], y[9:12], float(t))

    @classmethod
    def from_frame(cls, x0, v0, xdot0, p, t: float = 0.0) -> "PhaseState":
        """Build a state from a frame placement, a front-wheel direction and
        momentum ``p``, with admissibility ``v0 . (xdot0 - p) = 0``.

        The speed is normalized to one by scaling (p, r), which only
        reparametrizes the same geodesic.
        """
        v0 = np.asarray(v0, float)
        v0 = v0 / np.linalg.norm(v0)
        xdot0 = np.asarray(xdot0, float)
        p = np.asarray(p, float)
        if abs(v0 @ (xdot0 - p)) > 1e-10 * max(1.0, np.linalg.norm(xdot0)):
            raise DomainError("inadmissible initial data: v0 . (x'0 - p) != 0")
        speed = np.linalg.norm(xdot0)
        if speed == 0:
            raise DomainError("zero initial velocity")
        return cls(x0, v0, p / speed, (xdot0 - p) / speed, t)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.v, self.p, self.r])

    @property
    def y(self) -> Vec3:
        """Back wheel position."""
        return self.x - self.v

    @property
    def velocity(self) -> Vec3:
        return self.p + self.r

    @property
    def b(self) -> float:
        return float(self.p @ np.cross(self.v, self.velocity))

    @property
    def a(self) -> float:
        # |p - b n| with n = v x x' avoids cancellation in sqrt(|p|^2 - b^2) when a << b
        n = np.cross(self.v, self.velocity)
        return float(np.linalg.norm(self.p - float(self.p @ n) * n))

    def params(self) -> GeodesicParams:
        return GeodesicParams.from_ab(self.a, self.b)

    def constraint_residuals(self) -> tuple[float, float, float]:
        """(| |v|-1 |, |r.v|, | |p+r|-1 |)."""
        return (
            abs(float(np.linalg.norm(self.v)) - 1.0),
            abs(float(self.r @ self.v)),
            abs(float(np.linalg.norm(self.velocity)) - 1.0),
        )


class PhaseDerivative(NamedTuple):
    dx: np.ndarray
    dv: np.ndarray
    dp: np.ndarray
    dr: np.ndarray


@dataclass(frozen=True)
class MagneticData:
    """Killing field K(x) = (x - x1) x p + delta p whose trajectories are the front tracks."""

    K_axis_point: Vec3
    p: Vec3
    delta: float

    def field(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        return np.cross(x - self.K_axis_point, self.p) + self.delta * self.p


@dataclass(frozen=True)
class IntegrationOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    dt_out: float = 0.01
    max_steps: int = 1_000_000
    first_step: float = 0.01

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.dt_out <= 0:
            raise DomainError("dt_out must be positive")


@dataclass(frozen=True)
class InvariantReport:
    drift_H: float
    drift_p: float
    drift_b: float
    drift_vnorm: float
    drift_rv: float
    b: float
    a: float

    def max_drift(self) -> float:
        return max(self.drift_H, self.drift_p, self.drift_b, self.drift_vnorm, self.drift_rv)


class DenseSolution:
    """Continuous extension of an integration run (piecewise quartic)."""

    def __init__(self, t_grid, y_grid, k_grid):
        self.t_grid = t_grid
        self.y_grid = y_grid
        self.k_grid = k_grid
        for arr in (t_grid, y_grid, k_grid):
            arr.flags.writeable = False

    @property
    def t_span(self) -> tuple[float, float]:
        return float(self.t_grid[0]), float(self.t_grid[-1])

    def covers(self, t) -> bool:
        lo, hi = sorted(self.t_span)
        t = np.asarray(t)
        slack = 1e-12 * max(1.0, abs(hi), abs(lo))
        return bool(np.all((t >= lo - slack) & (t <= hi + slack)))

    def states(self, t) -> np.ndarray:
        """Projected states, shape (N, 12)."""
        if not self.covers(t):
            raise DomainError(f"time outside integrated span {self.t_span}")
        return _dopri.dense_eval(t, self.t_grid, self.y_grid, self.k_grid)

    def state(self, t: float) -> PhaseState:
        return PhaseState.from_array(self.states([t])[0], t)


@dataclass(frozen=True)
class SampledPath:
    """Time-stamped samples of a geodesic.

    ``x``, ``v``, ``r`` have shape (N, 3); ``p`` is the constant momentum.
    ``dense`` evaluates the full phase state at arbitrary times inside the
    span.  ``step_drift`` holds the largest pre-projection constraint drift
    per accepted step (| |v|-1 |, |r.v|) when the path came from integration.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    r: np.ndarray
    p: np.ndarray
    dense: object = field(repr=False)
    step_drift: tuple[float, float] = (0.0, 0.0)
    p_samples: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_states(cls, t, states, dense=None, step_drift=(0.0, 0.0)) -> "SampledPath":
        states = np.asarray(states, float)
        return cls(
            np.asarray(t, float),
            states[:, 0:3],
            states[:, 3:6],
            states[:, 9:12],
            states[0, 6:9].copy(),
            dense,
            step_drift,
            states[:, 6:9],
        )

    def __len__(self) -> int:
        return len(self.t)

    @property
    def y(self) -> np.ndarray:
        return self.x - self.v

    @property
    def velocity(self) -> np.ndarray:
        return self.p_all + self.r

    @property
    def p_all(self) -> np.ndarray:
        if self.p_samples is not None:
            return self.p_samples
        return np.broadcast_to(self.p, self.x.shape)

    def states(self) -> np.ndarray:
        return np.hstack([self.x, self.v, self.p_all, self.r])

    def state(self, i: int) -> PhaseState:
        return PhaseState(self.x[i], self.v[i], self.p_all[i], self.r[i], float(self.t[i]))

    def states_at(self, t) -> np.ndarray:
        if self.dense is None:
            raise NotApplicableError("path has no dense output")
        return self.dense.states(t)

    @property
    def b(self) -> float:
        return self.state(0).b

    @property
    def a(self) -> float:
        return self.state(0).a

    def params(self) -> GeodesicParams:
        return self.state(0).params()


# -- operations --------------------------------------------------------------


def canonical_initial_state(a: float, b: float) -> PhaseState:
    """Seed with v0 = e1, x'0 = e2, p = (0, a, b).

    This seed sits at a curvature *minimum*, kappa = |1 - a|.
    """
    if a < 0:
        raise DomainError("a must be nonnegative; reflect_params maps (a, b) -> (a, -b)")
    return PhaseState((0, 0, 0), (1, 0, 0), (0, a, b), (0, 1 - a, -b))


def peak_initial_state(a: float, b: float) -> PhaseState:
    """Seed with v0 = e1, x'0 = e2, p = (0, -a, b), at a curvature maximum
    kappa = 1 + a.  Time zero then matches the closed-form solutions."""
    if a < 0:
        raise DomainError("a must be nonnegative; reflect_params maps (a, b) -> (a, -b)")
    return PhaseState((0, 0, 0), (1, 0, 0), (0, -a, b), (0, 1 + a, -b))


def hamiltonian_rhs(s: PhaseState) -> PhaseDerivative:
    out = np.empty(12)
    _dopri.rhs(s.as_array(), out)
    return PhaseDerivative(out[0:3], out[3:6], out[6:9], out[9:12])


def acceleration(states: np.ndarray) -> np.ndarray:
    """x'' = r' along rows of a (N, 12) state array."""
    v = states[:, 3:6]
    p = states[:, 6:9]
    r = states[:, 9:12]
    vp = np.einsum("ij,ij->i", v, p)
    rr = np.einsum("ij,ij->i", r, r + p)
    return vp[:, None] * r - rr[:, None] * v


def integrate(s0: PhaseState, t_end: float, opts: IntegrationOptions | None = None) -> SampledPath:
    """Integrate from ``s0.t`` to ``t_end`` (either direction) and sample every ``dt_out``.

    Raises :class:`IntegrationError` (carrying the last good state) on step
    size underflow or when ``max_steps`` is exceeded.
    """
    opts = opts or IntegrationOptions()
    t0 = s0.t
    if t_end == t0:
        raise DomainError("t_end must differ from the initial time")
    direction = 1.0 if t_end > t0 else -1.0
    y = s0.as_array().copy()
    _dopri.project(y)
    t = t0
    h = opts.first_step * direction
    err_prev = 1e-4
    ts, ys, ks, drifts = [np.array([t0])], [y[None, :]], [], []
    total = 0
    while True:
        cap = min(_CHUNK, opts.max_steps - total)
        if cap <= 0:
            raise IntegrationError("max_steps exceeded", t, PhaseState.from_array(y, t))
        status, n, cts, cys, cks, cdr, h, err_prev = _dopri.run_chunk(
            y, t, float(t_end), h, opts.rel_tol, opts.abs_tol, cap, err_prev
        )
        if n:
            ts.append(cts[1 : n + 1])
            ys.append(cys[1 : n + 1])
            ks.append(cks[:n])
            drifts.append(cdr[:n])
            t = float(cts[n])
            y = cys[n].copy()
            total += n
        if status == _dopri.STATUS_DONE:
            break
        if status == _dopri.STATUS_UNDERFLOW:
            raise IntegrationError(f"step size underflow at t={t}", t, PhaseState.from_array(y, t))
    t_grid = np.concatenate(ts)
    y_grid = np.vstack(ys)
    k_grid = np.concatenate(ks)
    drift = np.vstack(drifts)
    dense = DenseSolution(t_grid, y_grid, k_grid)
    n_out = int(math.floor(abs(t_end - t0) / opts.dt_out + 1e-9))
    t_out = t0 + direction * opts.dt_out * np.arange(n_out + 1)
    if abs(t_out[-1] - t_end) > 1e-12 * max(1.0, abs(t_end)):
        t_out = np.append(t_out, t_end)
    states = dense.states(t_out)
    step_drift = (float(drift[:, 0].max()), float(drift[:, 1].max()))
    log.debug("integrated %d steps to t=%g, step drift %s", total, t_end, step_drift)
    return SampledPath.from_states(t_out, states, dense, step_drift)


# endpoint-only runs keep per-call buffers small
_FLOW_CHUNK = 256


def flow_end(y0: np.ndarray, t_end: float, rel_tol: float = 1e-12, abs_tol: float = 1e-14,
             max_steps: int = 200_000) -> np.ndarray:
    """Phase state after time ``t_end`` from ``y0`` (length-12 array); no sampling."""
    y = np.array(y0, float)
    _dopri.project(y)
    if t_end == 0.0:
        return y
    t, h, err_prev, total = 0.0, math.copysign(min(0.01, abs(t_end)), t_end), 1e-4, 0
    while True:
        status, n, cts, cys, _, _, h, err_prev = _dopri.run_chunk(
            y, t, float(t_end), h, rel_tol, abs_tol, _FLOW_CHUNK, err_prev
        )
        if n:
            t = float(cts[n])
            y = cys[n].copy()
            total += n
        if status == _dopri.STATUS_DONE:
            return y
        if status == _dopri.STATUS_UNDERFLOW or total >= max_steps:
            raise IntegrationError("flow did not reach t_end", t, PhaseState.from_array(y, t))


def magnetic_data(s0: PhaseState) -> MagneticData:
    """Axis point x1 and pitch delta of the Killing field through ``s0``."""
    p = s0.p
    p2 = float(p @ p)
    if p2 == 0.0:
        raise CircleBranchError("p = 0: front track is a unit circle with y(t) fixed at its center")
    w = np.cross(s0.velocity, s0.v)
    x1 = s0.y + np.cross(w, p) / p2
    delta = float(w @ p) / p2
    return MagneticData(_vec(x1), _vec(p), delta)


def invariant_report(path: SampledPath) -> InvariantReport:
    """Largest deviation of every conserved quantity over the samples."""
    if len(path) == 0:
        raise DomainError("empty path")
    v, r = path.v, path.r
    p = path.p_all
    xd = p + r
    H = 0.5 * np.einsum("ij,ij->i", xd, xd)
    b = np.einsum("ij,ij->i", p, np.cross(v, xd))
    n0 = np.cross(v[0], xd[0])
    return InvariantReport(
        drift_H=float(np.max(np.abs(H - H[0]))),
        drift_p=float(np.max(np.abs(p - p[0]))),
        drift_b=float(np.max(np.abs(b - b[0]))),
        drift_vnorm=float(np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0))),
        drift_rv=float(np.max(np.abs(np.einsum("ij,ij->i", r, v)))),
        b=float(b[0]),
        a=float(np.linalg.norm(p[0] - b[0] * n0)),
    )


def _angle(u, w) -> float:
    return math.atan2(float(np.linalg.norm(np.cross(u, w))), float(u @ w))


def shortcut_bound(path: SampledPath, n_periods: int) -> tuple[float, float]:
    """Compare the geodesic length n*T with an explicit competitor path.

    The competitor pivots the frame about the fixed back wheel until it
    points at y(nT), rides straight there, and pivots again to reach the
    final placement.  Each pivot moves the front wheel along a unit-sphere
    arc of length at most pi.
    """
    s0 = path.state(0)
    kappa_sq = np.einsum("ij,ij->i", path.r, path.r) - s0.b ** 2
    if np.max(np.abs(kappa_sq)) < 1e-12:
        raise NotApplicableError("linear front track has no shortcut")
    params = s0.params()
    if params.a == 0.0:
        T = 2 * math.pi  # unit circle
    else:
        if params.is_soliton:
            raise NotApplicableError("soliton track is aperiodic")
        T = params.period_T
    length = n_periods * T
    t_end = path.t[0] + length
    if not path.dense.covers(t_end):
        raise DomainError("path does not span the requested number of periods")
    end = PhaseState.from_array(path.states_at([t_end])[0], t_end)
    d = end.y - s0.y
    dist = float(np.linalg.norm(d))
    if dist < 1e-12:
        shortcut = _angle(s0.v, end.v)
    else:
        u = d / dist
        shortcut = _angle(s0.v, u) + dist + _angle(u, end.v)
    return length, shortcut
