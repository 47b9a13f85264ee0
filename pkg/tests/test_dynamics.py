import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicycle_geodesics.closedform import kappa_sq_closed
from bicycle_geodesics.dynamics import (IntegrationOptions, PhaseState, SampledPath, acceleration,
                                        canonical_initial_state, flow_end, hamiltonian_rhs, integrate,
                                        invariant_report, magnetic_data, peak_initial_state, shortcut_bound)
from bicycle_geodesics.errors import CircleBranchError, DomainError, IntegrationError, NotApplicableError
from bicycle_geodesics.params import GeodesicParams

TIGHT = IntegrationOptions(rel_tol=1e-12, abs_tol=1e-14)


def test_canonical_seed_values():
    s = canonical_initial_state(0.5, 1.0)
    assert np.allclose(s.x, 0) and np.allclose(s.v, [1, 0, 0])
    assert np.allclose(s.p, [0, 0.5, 1]) and np.allclose(s.r, [0, 0.5, -1])
    c = canonical_initial_state(0.0, 0.0)
    assert np.allclose(c.p, 0) and np.allclose(c.r, [0, 1, 0])
    line = canonical_initial_state(1.0, 0.0)
    assert np.allclose(line.p, [0, 1, 0]) and np.allclose(line.r, 0)


def test_negative_a_rejected():
    with pytest.raises(DomainError):
        canonical_initial_state(-0.5, 1.0)


def test_peak_seed_sits_at_curvature_maximum():
    a, b = 0.5, 1.0
    s = peak_initial_state(a, b)
    assert s.r @ s.r - b * b == pytest.approx((1 + a) ** 2, abs=1e-14)
    c = canonical_initial_state(a, b)
    assert c.r @ c.r - b * b == pytest.approx((1 - a) ** 2, abs=1e-14)


@given(st.floats(0.0, 3.0), st.floats(-3.0, 3.0))
def test_seed_invariants(a, b):
    for s in (canonical_initial_state(a, b), peak_initial_state(a, b)):
        assert abs(np.linalg.norm(s.v) - 1) <= 1e-12
        assert abs(s.r @ s.v) <= 1e-12
        assert abs(np.linalg.norm(s.p + s.r) - 1) <= 1e-12
        assert s.b == pytest.approx(b, abs=1e-12)
        assert s.a == pytest.approx(a, abs=1e-9)


def test_rhs_examples():
    circle = PhaseState([0, 0, 0], [1, 0, 0], [0, 0, 0], [0, 1, 0])
    d = hamiltonian_rhs(circle)
    assert np.allclose(d.dx, [0, 1, 0]) and np.allclose(d.dv, [0, 1, 0])
    assert np.allclose(d.dp, 0) and np.allclose(d.dr, [-1, 0, 0])
    line = PhaseState([0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 0])
    d = hamiltonian_rhs(line)
    assert np.allclose(d.dx, [0, 1, 0]) and np.allclose(d.dv, [0, 1, 0]) and np.allclose(d.dr, 0)
    d = hamiltonian_rhs(canonical_initial_state(0.5, 1.0))
    assert np.allclose(d.dx, [0, 1, 0]) and np.allclose(d.dv, [0, 1, 0]) and np.allclose(d.dr, [-0.5, 0, 0])


@given(st.floats(0.0, 2.0), st.floats(-2.0, 2.0))
def test_rhs_preserves_constraints_to_first_order(a, b):
    s = peak_initial_state(a, b)
    d = hamiltonian_rhs(s)
    assert abs(s.v @ d.dv) <= 1e-12
    assert abs(d.dr @ s.v + s.r @ d.dv) <= 1e-12


def test_magnetic_data_example():
    md = magnetic_data(canonical_initial_state(0.5, 1.0))
    assert md.delta == pytest.approx(-0.8, abs=1e-15)
    assert np.allclose(md.K_axis_point, [-0.6, 0, 0], atol=1e-15)
    # b = 0 zeroes delta; the axis of the straight line is the line itself
    md = magnetic_data(canonical_initial_state(1.0, 0.0))
    assert md.delta == 0.0
    assert np.allclose(md.K_axis_point, [0, 0, 0])


def test_magnetic_data_circle_branch():
    with pytest.raises(CircleBranchError):
        magnetic_data(canonical_initial_state(0.0, 0.0))


@given(st.floats(0.05, 2.0), st.floats(-2.0, 2.0))
def test_delta_identity(a, b):
    s = peak_initial_state(a, b)
    md = magnetic_data(s)
    assert md.delta * (s.p @ s.p) + s.b == pytest.approx(0.0, abs=1e-12)


def test_circle_closes_after_two_pi():
    path = integrate(canonical_initial_state(0.0, 0.0), 2 * math.pi, TIGHT)
    assert np.linalg.norm(path.x[-1] - path.x[0]) <= 1e-9
    assert np.max(np.linalg.norm(path.y - path.y[0], axis=1)) <= 1e-9
    assert np.max(np.abs(np.linalg.norm(path.x - path.y[0], axis=1) - 1)) <= 1e-9


def test_a_zero_with_twist_is_a_circle():
    path = integrate(canonical_initial_state(0.0, 0.8), 2 * math.pi, TIGHT)
    assert np.max(np.linalg.norm(path.y - path.y[0], axis=1)) <= 1e-9
    assert np.max(np.abs(np.linalg.norm(path.x - path.y[0], axis=1) - 1)) <= 1e-9


def test_line_branch():
    path = integrate(canonical_initial_state(1.0, 0.0), 5.0)
    expected = path.t[:, None] * np.array([0.0, 1.0, 0.0])
    assert np.max(np.abs(path.x - expected)) <= 1e-12


def test_kappa_sq_matches_closed_form():
    params = GeodesicParams.from_ab(0.5, 1.0)
    path = integrate(peak_initial_state(0.5, 1.0), 2 * params.period_T)
    ksq = np.einsum("ij,ij->i", path.r, path.r) - 1.0
    assert np.max(np.abs(ksq - kappa_sq_closed(path.t, params))) <= 1e-7


def test_invariants_over_ten_periods():
    params = GeodesicParams.from_ab(0.5, 1.0)
    path = integrate(canonical_initial_state(0.5, 1.0), 10 * params.period_T)
    rep = invariant_report(path)
    assert rep.max_drift() <= 1e-9
    assert rep.a ** 2 + rep.b ** 2 == pytest.approx(1.25, abs=1e-12)
    assert max(path.step_drift) <= 1e-10


def test_invariant_report_detects_corruption():
    path = integrate(peak_initial_state(0.5, 1.0), 1.0)
    states = path.states()
    states[5, 3:6] *= 1.01
    bad = SampledPath.from_states(path.t, states)
    assert invariant_report(bad).drift_vnorm == pytest.approx(0.01, rel=1e-9)


def test_exact_states_have_zero_drift():
    # rotating the seed about p gives exact states on the same level sets
    s = peak_initial_state(0.7, 0.4)
    u = s.p / np.linalg.norm(s.p)
    rows = []
    for ang in np.linspace(0, 2, 7):
        c, si = math.cos(ang), math.sin(ang)
        R = c * np.eye(3) + si * np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]]) \
            + (1 - c) * np.outer(u, u)
        rows.append(np.concatenate([R @ s.x, R @ s.v, s.p, R @ s.r]))
    rep = invariant_report(SampledPath.from_states(np.arange(7.0), rows))
    assert rep.max_drift() <= 1e-12


def test_killing_field_consistency():
    path = integrate(peak_initial_state(0.5, 1.0), 8.0)
    md = magnetic_data(path.state(0))
    K = np.cross(path.x - md.K_axis_point, md.p) + md.delta * md.p
    acc = acceleration(path.states())
    assert np.max(np.abs(acc - np.cross(path.velocity, K))) <= 1e-8


def test_triple_product_equals_b():
    path = integrate(canonical_initial_state(1.5, 2.0), 10.0)
    b = np.einsum("ij,ij->i", path.p_all, np.cross(path.v, path.velocity))
    assert np.max(np.abs(b - 2.0)) <= 1e-9


def test_dense_output_matches_samples():
    path = integrate(peak_initial_state(0.3, 2.0), 6.0, IntegrationOptions(dt_out=0.5))
    assert np.max(np.abs(path.states_at(path.t) - path.states())) <= 1e-12
    with pytest.raises(DomainError):
        path.states_at([7.0])


def test_flow_end_agrees_with_integrate():
    s = peak_initial_state(0.7, 0.5)
    path = integrate(s, 3.0, IntegrationOptions(rel_tol=1e-12, abs_tol=1e-14, dt_out=3.0))
    y = flow_end(s.as_array(), 3.0)
    assert np.max(np.abs(y - path.states()[-1])) <= 1e-10


def test_flow_end_step_limit():
    with pytest.raises(IntegrationError):
        flow_end(peak_initial_state(0.5, 1.0).as_array(), 50.0, max_steps=10)


def test_options_validation():
    with pytest.raises(DomainError):
        IntegrationOptions(rel_tol=0.0)
    with pytest.raises(DomainError):
        IntegrationOptions(dt_out=-1.0)


@settings(max_examples=10)
@given(st.floats(0.1, 1.8), st.floats(0.0, 2.0))
def test_integrated_invariants_property(a, b):
    path = integrate(peak_initial_state(a, b), 6.0)
    assert invariant_report(path).max_drift() <= 1e-9


def test_shortcut_examples():
    circle = integrate(canonical_initial_state(0.0, 0.0), 3 * 2 * math.pi + 0.1)
    geo, short = shortcut_bound(circle, 3)
    assert geo == pytest.approx(6 * math.pi) and short < geo
    params = GeodesicParams.from_ab(0.5, 1.0)
    path = integrate(peak_initial_state(0.5, 1.0), 50 * params.period_T + 0.1, IntegrationOptions(dt_out=0.5))
    geo, short = shortcut_bound(path, 50)
    assert short < geo
    line = integrate(canonical_initial_state(1.0, 0.0), 2.0)
    with pytest.raises(NotApplicableError):
        shortcut_bound(line, 1)


def test_span_below_minimum_step():
    s = peak_initial_state(1.0, 1.0)
    later = integrate(s, 10.0, TIGHT).state(-1)
    path = integrate(later, later.t + 1.2e-14, TIGHT)
    assert np.max(np.abs(path.states()[-1] - later.as_array())) <= 1e-13
