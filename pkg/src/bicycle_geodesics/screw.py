"""Proper rigid motions of R^3 in matrix form and in screw (Chasles) form."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


def rotation_about(axis, angle: float) -> np.ndarray:
    """Right-handed rotation by ``angle`` about the unit vector ``axis`` (Rodrigues)."""
    u = np.asarray(axis, float)
    u = u / np.linalg.norm(u)
    ux = np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]])
    return np.eye(3) + math.sin(angle) * ux + (1 - math.cos(angle)) * (ux @ ux)


@dataclass(frozen=True)
class RigidMotion:
    """q -> rotation @ q + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, float)
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-10 or abs(np.linalg.det(R) - 1.0) > 1e-10:
            raise DomainError("rotation is not a proper orthogonal matrix")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", np.asarray(self.translation, float).reshape(3))

    def apply(self, q) -> np.ndarray:
        q = np.asarray(q, float)
        return q @ self.rotation.T + self.translation

    def compose(self, other: "RigidMotion") -> "RigidMotion":
        """self after other."""
        return RigidMotion(self.rotation @ other.rotation,
                           self.rotation @ other.translation + self.translation)

    def power(self, n: int) -> "RigidMotion":
        out = RigidMotion(np.eye(3), np.zeros(3))
        for _ in range(n):
            out = self.compose(out)
        return out

    def inverse(self) -> "RigidMotion":
        Rt = self.rotation.T
        return RigidMotion(Rt, -Rt @ self.translation)


@dataclass(frozen=True)
class ScrewMotion:
    """Rotation by ``delta_theta`` about the oriented line through
    ``axis_point`` along ``axis_dir``, followed by translation ``delta_z``
    along it.

    ``delta_theta`` is reduced to [0, 2 pi); ``signed_theta`` keeps the
    unreduced value when one is known, with ``winding`` full turns.
    """

    axis_point: np.ndarray
    axis_dir: np.ndarray
    delta_theta: float
    delta_z: float
    signed_theta: float | None = None
    winding: int = 0
    residual: float | None = None  # RMS of the fit when extracted from samples

    def __post_init__(self):
        d = np.asarray(self.axis_dir, float)
        nd = np.linalg.norm(d)
        if abs(nd - 1.0) > 1e-9:
            raise DomainError("axis_dir must be a unit vector")
        object.__setattr__(self, "axis_dir", d)
        object.__setattr__(self, "axis_point", np.asarray(self.axis_point, float))

    @classmethod
    def from_signed(cls, axis_point, axis_dir, theta: float, dz: float) -> "ScrewMotion":
        winding = math.floor(theta / TWO_PI)
        return cls(axis_point, axis_dir, theta - TWO_PI * winding, dz, theta, int(winding))

    def to_rigid(self) -> RigidMotion:
        R = rotation_about(self.axis_dir, self.delta_theta)
        q = self.axis_point
        return RigidMotion(R, q - R @ q + self.delta_z * self.axis_dir)

    def apply(self, q) -> np.ndarray:
        return self.to_rigid().apply(q)

    def composed_twice(self) -> "ScrewMotion":
        return ScrewMotion(self.axis_point, self.axis_dir,
                           (2 * self.delta_theta) % TWO_PI, 2 * self.delta_z)


def wrap_angle(x: float) -> float:
    """Reduce to [0, 2 pi)."""
    y = math.fmod(x, TWO_PI)
    if y < 0:
        y += TWO_PI
    return 0.0 if y >= TWO_PI else y


def angle_distance(x: float, y: float) -> float:
    """Distance between two angles on the circle."""
    d = wrap_angle(x - y)
    return min(d, TWO_PI - d)


def screw_from_rigid(M: RigidMotion, orient=None, angle_tol: float = 1e-12) -> ScrewMotion:
    """Chasles decomposition of a proper rigid motion.

    The axis is oriented along ``orient`` when given (else along the
    translation, else arbitrary).  Rotations by pi use the symmetric part.
    """
    R, t = M.rotation, M.translation
    cos_t = max(-1.0, min(1.0, (np.trace(R) - 1.0) / 2.0))
    vee = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    sin_t = float(np.linalg.norm(vee))
    theta = math.atan2(sin_t, cos_t)  # in [0, pi]
    if theta < angle_tol:
        u = np.asarray(orient, float) if orient is not None else t
        nu = np.linalg.norm(u)
        u = u / nu if nu > 0 else np.array([0.0, 0.0, 1.0])
        dz = float(u @ t)
        # pure translation: every parallel line is an axis; pick the one through the origin
        return ScrewMotion(np.zeros(3), u, 0.0, dz)
    if sin_t > 1e-6:
        u = vee / sin_t
    else:
        S = 0.5 * (R + R.T) - cos_t * np.eye(3)  # = (1 - cos) u u^T
        j = int(np.argmax(np.diag(S)))
        u = S[:, j] / math.sqrt(S[j, j] * (1.0 - cos_t))
        u = u / np.linalg.norm(u)
        if sin_t > 0 and u @ vee < 0:
            u = -u
    ref = orient if orient is not None else (t if np.linalg.norm(t) > 0 else None)
    if ref is not None and u @ np.asarray(ref, float) < 0:
        u = -u
        theta = TWO_PI - theta
    dz = float(u @ t)
    t_perp = t - dz * u
    # foot of the axis: solves (I - R) q = t_perp with q . u = 0
    q = 0.5 * (t_perp + np.cross(u, t_perp) / math.tan(theta / 2.0))
    return ScrewMotion(q, u, wrap_angle(theta), dz)
