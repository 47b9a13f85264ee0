import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bicycle_geodesics.errors import DomainError
from bicycle_geodesics.screw import (RigidMotion, ScrewMotion, angle_distance, rotation_about,
                                     screw_from_rigid, wrap_angle)

unit = st.tuples(*[st.floats(-1, 1)] * 3).map(np.array).filter(lambda u: np.linalg.norm(u) > 0.1).map(
    lambda u: u / np.linalg.norm(u))
vec = st.tuples(*[st.floats(-5, 5)] * 3).map(np.array)


def test_rotation_about_z():
    R = rotation_about([0, 0, 1], math.pi / 2)
    assert R @ np.array([1.0, 0, 0]) == pytest.approx([0, 1, 0], abs=1e-15)


def test_rejects_improper_rotation():
    with pytest.raises(DomainError):
        RigidMotion(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(DomainError):
        ScrewMotion(np.zeros(3), np.array([0, 0, 2.0]), 0.0, 0.0)


def test_half_turn_uses_symmetric_part():
    u = np.array([1.0, 2.0, 2.0]) / 3
    q = np.array([0.5, -1.0, 0.0])
    sm = ScrewMotion(q, u, math.pi, 0.7)
    back = screw_from_rigid(sm.to_rigid(), orient=u)
    assert back.axis_dir == pytest.approx(u, abs=1e-12)
    assert back.delta_theta == pytest.approx(math.pi, abs=1e-12)
    assert back.delta_z == pytest.approx(0.7, abs=1e-12)
    assert np.allclose(back.apply(np.eye(3)), sm.apply(np.eye(3)), atol=1e-12)


def test_pure_translation():
    sm = screw_from_rigid(RigidMotion(np.eye(3), [0, 0, 2.0]))
    assert sm.delta_theta == 0.0 and sm.delta_z == 2.0
    assert sm.axis_dir == pytest.approx([0, 0, 1])


def test_compose_power_inverse():
    A = RigidMotion(rotation_about([0, 1, 0], 0.4), [1.0, 0, 2])
    B = RigidMotion(rotation_about([1, 1, 0], -1.1), [0, 3.0, 0])
    q = np.array([0.2, -0.4, 1.5])
    assert A.compose(B).apply(q) == pytest.approx(A.apply(B.apply(q)))
    assert A.power(3).apply(q) == pytest.approx(A.apply(A.apply(A.apply(q))))
    assert A.inverse().apply(A.apply(q)) == pytest.approx(q, abs=1e-14)
    assert A.power(0).apply(q) == pytest.approx(q)


def test_from_signed_winding():
    sm = ScrewMotion.from_signed(np.zeros(3), np.array([0, 0, 1.0]), -0.5, 1.0)
    assert sm.winding == -1
    assert sm.delta_theta == pytest.approx(2 * math.pi - 0.5)
    assert sm.signed_theta == -0.5


@given(unit, st.floats(0.01, 2 * math.pi - 0.01), st.floats(-3, 3), vec)
def test_screw_round_trip(u, theta, dz, q):
    sm = ScrewMotion(q, u, theta, dz)
    back = screw_from_rigid(sm.to_rigid(), orient=u)
    assert angle_distance(back.delta_theta, theta) <= 1e-8
    assert back.delta_z == pytest.approx(dz, abs=1e-8)
    pts = np.array([[1.0, 0, 0], [0, 2.0, -1], [3, 1, 1]])
    assert np.allclose(back.apply(pts), sm.apply(pts), atol=1e-8)


@given(st.floats(-50, 50))
def test_wrap_angle_range(x):
    y = wrap_angle(x)
    assert 0.0 <= y < 2 * math.pi
    assert math.cos(y) == pytest.approx(math.cos(x), abs=1e-12)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_angle_distance_symmetric(x, y):
    d = angle_distance(x, y)
    assert 0.0 <= d <= math.pi
    assert d == pytest.approx(angle_distance(y, x), abs=1e-12)
