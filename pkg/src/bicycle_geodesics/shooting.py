"""Boundary-value problems: geodesics joining two placements of the segment.

A placement is a front-wheel position x and a unit direction v (the back
wheel sits at x - v).  The unknowns are the initial front-wheel velocity
x'0 on the unit sphere, the part of p orthogonal to v0 (the rest is fixed
by r0 . v0 = 0) and the duration: five numbers, six residuals.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import qmc

from .dynamics import flow_end
from .errors import DomainError, IntegrationError, NoSolutionFound

log = logging.getLogger(__name__)

CONVERGED_TOL = 1e-8


@dataclass(frozen=True)
class FramePlacement:
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, float).reshape(3)
        v = np.asarray(self.v, float).reshape(3)
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise DomainError("placement direction must be a unit vector")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)

    @classmethod
    def normalized(cls, x, v) -> "FramePlacement":
        v = np.asarray(v, float)
        return cls(x, v / np.linalg.norm(v))

    @property
    def back(self) -> np.ndarray:
        return self.x - self.v


@dataclass(frozen=True)
class ShootingOptions:
    restarts: int = 16
    seed: int = 0
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    min_duration: float = 1e-3
    max_duration: float | None = None
    cluster_tol: float = 1e-4
    max_nfev: int = 400
    # the search runs at coarse_tol; candidates below polish_gate are re-solved at rel_tol
    coarse_tol: float = 1e-9
    polish_gate: float = 1e-4
    # trial points beyond these are rejected; large |p| makes the flow stiff
    p_max: float = 8.0
    duration_cap: float = 20.0


@dataclass(frozen=True)
class ShootingResult:
    p: np.ndarray
    duration: float
    residual: float
    iterations: int
    converged: bool
    xdot0: np.ndarray

    def initial_state(self, start: FramePlacement) -> np.ndarray:
        """Phase state (x, v, p, r) at the start placement."""
        return np.concatenate([start.x, start.v, self.p, self.xdot0 - self.p])


def _basis_perp(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    trial = np.array([1.0, 0.0, 0.0]) if abs(w[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - (trial @ w) * w
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(w, e1)


class _Chart:
    """Maps z = (alpha, beta, q1, q2, duration) to (x'0, p)."""

    def __init__(self, start: FramePlacement, w: np.ndarray):
        self.v0 = start.v
        self.w = w
        self.e1, self.e2 = _basis_perp(w)
        self.f1, self.f2 = _basis_perp(start.v)

    def unpack(self, z) -> tuple[np.ndarray, np.ndarray, float]:
        d = self.w + z[0] * self.e1 + z[1] * self.e2
        xdot = d / np.linalg.norm(d)
        p = (xdot @ self.v0) * self.v0 + z[2] * self.f1 + z[3] * self.f2
        return xdot, p, float(z[4])


def _residual_fn(start: FramePlacement, target: FramePlacement, chart: _Chart, opts: ShootingOptions,
                 rel_tol: float):
    t_cap = opts.max_duration or opts.duration_cap + 4.0 * float(np.linalg.norm(target.x - start.x))

    def fn(z):
        xdot, p, dur = chart.unpack(z)
        if np.linalg.norm(p) > opts.p_max or not (0.0 < dur <= t_cap):
            return np.full(6, 1e3)
        y0 = np.concatenate([start.x, start.v, p, xdot - p])
        try:
            y = flow_end(y0, dur, rel_tol, rel_tol * opts.abs_tol / opts.rel_tol)
        except IntegrationError:
            return np.full(6, 1e3)
        return np.concatenate([y[0:3] - target.x, y[3:6] - target.v])

    return fn


def _central_jac(fn):
    def jac(z):
        z = np.asarray(z, float)
        J = np.empty((6, z.size))
        for i in range(z.size):
            h = 6e-6 * max(1.0, abs(z[i]))
            e = np.zeros_like(z)
            e[i] = h
            J[:, i] = (fn(z + e) - fn(z - e)) / (2 * h)
        return J

    return jac


def shoot(start: FramePlacement, target: FramePlacement, opts: ShootingOptions | None = None) -> list[ShootingResult]:
    """All distinct converged connections found from quasi-random restarts,
    sorted by duration.  Finding none raises :class:`NoSolutionFound`,
    which says nothing about existence."""
    opts = opts or ShootingOptions()
    gap = target.x - start.x
    dist = float(np.linalg.norm(gap))
    if dist < 1e-14 and np.linalg.norm(target.v - start.v) < 1e-14:
        raise NoSolutionFound("identical placements: only the trivial zero-length path connects them")
    w = gap / dist if dist > 1e-12 else np.cross(start.v, target.v)
    if np.linalg.norm(w) < 1e-12:
        w, _ = _basis_perp(start.v)
    w = w / np.linalg.norm(w)
    chart = _Chart(start, w)
    coarse = _residual_fn(start, target, chart, opts, opts.coarse_tol)
    fine = _residual_fn(start, target, chart, opts, opts.rel_tol)

    sampler = qmc.Sobol(d=5, scramble=True, seed=opts.seed)
    # Sobol balance needs a power-of-two draw; use its leading points
    u = sampler.random_base2(max(0, math.ceil(math.log2(max(opts.restarts, 1)))))[:opts.restarts]
    lo = np.array([-1.0, -1.0, -1.5, -1.5, max(dist, opts.min_duration) * 1.01])
    hi = np.array([1.0, 1.0, 1.5, 1.5, max(3.0 * dist, 1.0) + 0.5])
    seeds = lo + u * (hi - lo)
    seeds[0] = [0.0, 0.0, 0.0, 0.0, max(dist, opts.min_duration) * 1.05]

    found: list[ShootingResult] = []
    keys: list[np.ndarray] = []
    for z0 in seeds:
        sol = least_squares(coarse, z0, method="lm", jac=_central_jac(coarse), xtol=1e-12, ftol=1e-12,
                            gtol=1e-12, max_nfev=opts.max_nfev // 2)
        if np.linalg.norm(sol.fun) > opts.polish_gate:
            continue
        nfev = sol.nfev
        sol = least_squares(fine, sol.x, method="lm", jac=_central_jac(fine), xtol=1e-15, ftol=1e-15,
                            gtol=1e-15, max_nfev=opts.max_nfev // 2)
        nfev += sol.nfev
        xdot, p, dur = chart.unpack(sol.x)
        res = float(np.linalg.norm(sol.fun))
        if res > CONVERGED_TOL:
            continue
        if dur < opts.min_duration or (opts.max_duration is not None and dur > opts.max_duration):
            continue
        key = np.concatenate([p, [dur]])
        if any(np.linalg.norm(key - k) < opts.cluster_tol for k in keys):
            continue
        keys.append(key)
        found.append(ShootingResult(p, dur, res, int(nfev), True, xdot))
    if not found:
        raise NoSolutionFound(f"no restart out of {opts.restarts} converged")
    log.debug("shoot: %d distinct solutions", len(found))
    return sorted(found, key=lambda r: (r.duration, tuple(r.p)))
