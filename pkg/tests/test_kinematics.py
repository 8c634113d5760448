import math

import pytest
from hypothesis import given, strategies as st

from rmfsim.kinematics import (DEFAULT_PARAMS, InfeasibleSegment, KinematicParams,
                               run_cell_crossings, run_time, segment_time,
                               time_at_distance)


def numeric_profile_time(distance, v_in=0.0, v_out=0.0, params=DEFAULT_PARAMS, dt=1e-5):
    """Independent oracle: integrate a bang-bang speed profile numerically."""
    if distance == 0 and v_in == v_out:
        return 0.0
    a, vmax = params.accel, params.vmax
    v, x, t = v_in, 0.0, 0.0
    while x < distance - 1e-9:
        # distance needed to brake from v to v_out
        brake = (v * v - v_out * v_out) / (2 * a) if v > v_out else 0.0
        if distance - x <= brake + 0.5 * dt * v:
            dv = -a * dt
        elif v < vmax:
            dv = a * dt
        else:
            dv = 0.0
        v_new = min(max(v + dv, 0.0), vmax)
        x += 0.5 * (v + v_new) * dt
        v = v_new
        t += dt
        if t > 1e4:
            raise RuntimeError("oracle diverged")
    return t


def test_zero_distance_zero_time():
    assert segment_time(0.0, 0.0, 0.0) == 0.0


def test_rest_to_rest_4_5m_is_6s():
    # accelerate 3 s over 2.25 m, decelerate 3 s: the triangular boundary case
    assert segment_time(4.5) == pytest.approx(6.0, abs=1e-12)


def test_rest_to_rest_1m_triangular():
    assert segment_time(1.0) == pytest.approx(2 * math.sqrt(1.0 / 0.5), abs=1e-12)


@pytest.mark.parametrize("d", [0.1, 0.5, 1.0, 2.0, 4.5, 5.0, 10.0, 37.5])
def test_matches_numeric_oracle_rest_to_rest(d):
    assert segment_time(d) == pytest.approx(numeric_profile_time(d), abs=2e-2)


@pytest.mark.parametrize("d,v_in,v_out", [
    (3.0, 0.5, 0.0), (3.0, 0.0, 1.0), (6.0, 1.5, 1.5), (2.5, 1.0, 0.5),
])
def test_matches_numeric_oracle_moving_endpoints(d, v_in, v_out):
    assert segment_time(d, v_in, v_out) == pytest.approx(
        numeric_profile_time(d, v_in, v_out), abs=2e-2)


def test_infeasible_speed_change_raises():
    # need (1.5^2)/(2*0.5) = 2.25 m to reach full speed from rest
    with pytest.raises(InfeasibleSegment):
        segment_time(1.0, 0.0, 1.5)


def test_turn_times():
    p = DEFAULT_PARAMS
    assert p.turn_time(0) == 0.0
    assert p.turn_time(1) == pytest.approx(0.625)
    assert p.turn_time(2) == pytest.approx(1.25)
    assert p.turn_time(3) == pytest.approx(0.625)  # turn the short way


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        KinematicParams(accel=0.0)


@given(st.floats(min_value=0.01, max_value=200.0))
def test_time_monotone_in_distance(d):
    assert segment_time(d + 0.5) > segment_time(d)


@given(st.floats(min_value=0.02, max_value=100.0))
def test_splitting_a_run_never_helps(d):
    # stopping midway can only add time
    assert segment_time(d) <= segment_time(d / 2) * 2 + 1e-9


def test_cell_crossings_consistent_with_run_time():
    for k in (1, 2, 5, 9, 40):
        crossings = run_cell_crossings(k)
        assert len(crossings) == k
        assert all(b > a for a, b in zip(crossings, crossings[1:]))
        assert crossings[-1] < run_time(k)
        # crossing j is at distance j + 0.5; invertibility check
        assert time_at_distance(0.5, float(k)) == pytest.approx(crossings[0])


def test_time_at_distance_endpoints():
    assert time_at_distance(0.0, 5.0) == 0.0
    assert time_at_distance(5.0, 5.0) == pytest.approx(run_time(5))
