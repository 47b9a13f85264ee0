import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from bicycle_geodesics.closedform import (axis_frame, back_track_cartesian, cylindrical_track,
                                          front_track_array, front_track_cartesian, kappa_closed,
                                          kappa_sq_closed, monodromy_angles, monodromy_closed, tau_closed,
                                          theta_closed, theta_rate)
from bicycle_geodesics.dynamics import IntegrationOptions, integrate, peak_initial_state
from bicycle_geodesics.errors import CircleBranchError, NearSingularCharacteristic, SolitonError
from bicycle_geodesics.params import GeodesicParams
from bicycle_geodesics.screw import angle_distance
from bicycle_geodesics.transforms import extract_monodromy, register

TIGHT = IntegrationOptions(rel_tol=1e-12, abs_tol=1e-14, dt_out=0.05)
GRID = [(a, b) for a in (0.3, 0.7, 1.0, 1.5) for b in (0.0, 0.5, 1.0, 2.0) if (a, b) != (1.0, 0.0)]

# away from the soliton and the axis-crossing locus
regular = st.tuples(st.floats(0.05, 2.5), st.floats(0.0, 2.5)).filter(
    lambda ab: abs(ab[0] - 1) + ab[1] > 0.05 and abs(ab[0] ** 2 + ab[1] ** 2 - ab[0]) > 1e-3)


def test_kappa_sq_examples():
    p = GeodesicParams.from_ab(0.5, 1.0)
    assert kappa_sq_closed(0.0, p) == pytest.approx(2.25, abs=1e-15)
    assert kappa_sq_closed(p.period_T / 2, p) == pytest.approx(0.25, abs=1e-12)


def test_soliton_curvature():
    p = GeodesicParams.from_ab(1.0, 0.0)
    t = np.linspace(-8, 8, 81)
    assert np.max(np.abs(kappa_closed(t, p) - 2 / np.cosh(t))) <= 1e-14


def test_signed_kappa_on_constant_torsion_family():
    p = GeodesicParams.from_ab(1.0, 1.0)
    assert kappa_closed(0.0, p) == pytest.approx(2.0)
    assert kappa_closed(p.period_T, p) == pytest.approx(-2.0, abs=1e-12)
    assert np.all(tau_closed(np.linspace(0, 5, 7), p) == 0.5)


@given(regular, st.floats(-20.0, 20.0))
def test_kappa_sq_bounds(ab, t):
    a, b = ab
    v = kappa_sq_closed(t, GeodesicParams.from_ab(a, b))
    assert (1 - a) ** 2 - 1e-12 <= v <= (1 + a) ** 2 + 1e-12


def test_cylindrical_examples():
    p = GeodesicParams.from_ab(0.7, 0.0)
    for t in (0.3, 2.0, 7.0):
        assert theta_closed(t, p) == 0.0
        assert front_track_cartesian(t, p)[1] == 0.0
    p = GeodesicParams.from_ab(0.5, 1.0)
    c = cylindrical_track(0.0, p)
    assert (c.r, c.theta, c.z) == pytest.approx((math.sqrt(p.A) / p.p_norm, 0.0, 0.0))
    assert front_track_cartesian(0.0, p) == pytest.approx([math.sqrt(p.A) / p.p_norm, 0, 0])


def test_circle_branch_has_no_axis():
    with pytest.raises(CircleBranchError):
        cylindrical_track(1.0, GeodesicParams.from_ab(0.0, 0.0))
    with pytest.raises(CircleBranchError):
        monodromy_angles(GeodesicParams.from_ab(0.0, 0.0))


@pytest.mark.parametrize("a,b", [(0.5, 1.0), (1.0, 1.0), (1.5, 0.0), (0.3, 2.0), (0.7, 0.5)])
def test_track_matches_integration_in_axis_frame(a, b):
    p = GeodesicParams.from_ab(a, b)
    s0 = peak_initial_state(a, b)
    path = integrate(s0, 2 * p.period_T, TIGHT)
    origin, rows = axis_frame(s0)
    front = (path.x - origin) @ rows.T
    back = (path.y - origin) @ rows.T
    assert np.max(np.abs(front - front_track_array(path.t, p))) <= 1e-6
    closed_back = np.array([back_track_cartesian(t, p) for t in path.t])
    assert np.max(np.abs(back - closed_back)) <= 1e-6


def test_track_rigid_alignment():
    p = GeodesicParams.from_ab(0.5, 1.0)
    path = integrate(peak_initial_state(0.5, 1.0), p.period_T, TIGHT)
    _, rms = register(front_track_array(path.t, p), path.x)
    assert rms <= 1e-6


def test_theta_matches_quadrature_of_rate():
    p = GeodesicParams.from_ab(0.7, 1.3)
    for t in (0.4, 3.1, 9.0):
        val, _ = quad(theta_rate, 0.0, t, args=(p,), epsabs=1e-13, epsrel=1e-13, limit=200)
        assert theta_closed(t, p) == pytest.approx(val, abs=1e-10)


@settings(max_examples=25)
@given(regular, st.floats(-10.0, 10.0))
def test_quasi_periodicity(ab, t):
    p = GeodesicParams.from_ab(*ab)
    T = p.period_T
    dtheta, dz = monodromy_angles(p)
    c0, c1 = cylindrical_track(t, p), cylindrical_track(t + T, p)
    assert abs(c1.r - c0.r) <= 1e-10
    assert abs(c1.theta - c0.theta - dtheta) <= 1e-9 * max(1.0, abs(dtheta))
    assert abs(c1.z - c0.z - dz) <= 1e-9 * max(1.0, abs(dz))


def test_monodromy_examples():
    sm = monodromy_closed(GeodesicParams.from_ab(0.7, 0.0))
    assert sm.delta_theta == 0.0 and sm.delta_z > 0
    dtheta, dz = monodromy_angles(GeodesicParams.from_ab(0.0, 0.8))
    assert dz == pytest.approx(0.0, abs=1e-14)
    assert dtheta == pytest.approx(2 * math.pi / math.sqrt(1 + 0.64), abs=1e-13)
    with pytest.raises(SolitonError, match="soliton: aperiodic"):
        monodromy_angles(GeodesicParams.from_ab(1.0, 0.0))


def test_monodromy_winding_bookkeeping():
    p = GeodesicParams.from_ab(0.3, 2.0)
    sm = monodromy_closed(p)
    assert 0.0 <= sm.delta_theta < 2 * math.pi
    assert sm.signed_theta == pytest.approx(sm.delta_theta + 2 * math.pi * sm.winding)


@pytest.mark.parametrize("a,b", GRID)
def test_monodromy_matches_extraction(a, b):
    p = GeodesicParams.from_ab(a, b)
    path = integrate(peak_initial_state(a, b), 2 * p.period_T + 0.1, TIGHT)
    M = extract_monodromy(path, p)
    C = monodromy_closed(p, path.state(0))
    assert angle_distance(M.delta_theta, C.delta_theta) <= 1e-6
    assert abs(M.delta_z - C.delta_z) <= 1e-6
    if b == 0.0:
        return  # pure translation: every line along p is an axis
    off = M.axis_point - C.axis_point
    assert np.linalg.norm(off - (off @ C.axis_dir) * C.axis_dir) <= 1e-6


@pytest.mark.parametrize("b", [0.5, 0.5 + 1e-9, 0.5 - 1e-5])
def test_axis_crossing_locus(b):
    a = 0.5
    p = GeodesicParams.from_ab(a, b)
    with pytest.warns(NearSingularCharacteristic):
        dtheta, dz = monodromy_angles(p)
    path = integrate(peak_initial_state(a, b), 2 * p.period_T + 0.1, TIGHT)
    M = extract_monodromy(path, p)
    assert angle_distance(M.delta_theta, dtheta) <= 1e-6
    assert abs(M.delta_z - dz) <= 1e-6


def test_screw_composition_law():
    sm = monodromy_closed(GeodesicParams.from_ab(0.5, 1.0))
    twice = sm.composed_twice()
    assert twice.delta_z == pytest.approx(2 * sm.delta_z)
    assert angle_distance(twice.delta_theta, 2 * sm.delta_theta) <= 1e-14
    q = np.array([0.3, -1.2, 0.8])
    assert np.allclose(twice.apply(q), sm.apply(sm.apply(q)), atol=1e-12)
