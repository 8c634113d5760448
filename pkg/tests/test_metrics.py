import math

import pytest
from hypothesis import given, strategies as st

from rmfsim.metrics import (MetricsRecord, RunCounters, UpperBoundTimes,
                            compute_metrics, pearson, upper_bound)


def bound(t_pick=8, move_up=7.0, t_handle=15, stations=2, ipo=1.0):
    return upper_bound(UpperBoundTimes(
        t_pick=t_pick, t_handle=t_handle, t_drive_in=move_up, t_turn_out=0.0,
        t_drive_out=0.0, ipo=ipo, pick_station_count=stations))


def test_case1_golden_480():
    assert bound() == pytest.approx(480.0, abs=1e-12)


def test_case2_golden_432():
    assert bound(move_up=12.0, ipo=3.0) == pytest.approx(432.0, abs=1e-12)


def test_branch_continuity_at_boundary():
    # at t_pick + move_up == t_handle the case-2 denominator collapses to
    # ipo * t_handle for every ipo
    for ipo in (1.0, 2.0, 7.5):
        left = bound(move_up=7.0, ipo=ipo)
        eps = 1e-12
        right = bound(move_up=7.0 + eps, ipo=ipo)
        assert abs(left - right) < 1e-9


def test_case2_limit_large_ipo_approaches_case1():
    limit = bound(move_up=12.0, ipo=1e6)
    assert abs(limit - 480.0) / 480.0 < 1e-3


def test_invalid_times_rejected():
    with pytest.raises(ValueError):
        upper_bound(UpperBoundTimes(ipo=0.5))
    with pytest.raises(ValueError):
        upper_bound(UpperBoundTimes(t_pick=-1))


# ------------------------------------------------------------------ measures

def hand_trace_counters():
    # 12 units over 4 pod visits; 3 completed orders:
    #   o1 submit 0, due 1800, complete 1500  -> offset -300, turnover 1500
    #   o2 submit 100, due 7300, complete 7500 -> offset 200 (late), turnover 7400
    #   o3 submit 50, due 7250, complete 7200  -> offset -50, turnover 7150
    return RunCounters(
        units_picked=12,
        orders_completed=3,
        turnover_sum=1500 + 7400 + 7150,
        offset_sum=-300 + 200 - 50,
        late_orders=1,
        pick_pod_visits=4,
        repl_pod_visits=2,
        robot_distances=(100.0, 300.0),
        station_busy=(1800.0, 900.0),
    )


def test_compute_metrics_matches_hand_computation():
    horizon = 3600.0
    rec = compute_metrics(hand_trace_counters(), horizon, bound=480.0)
    assert rec.unit_throughput == pytest.approx(12.0)
    assert rec.order_throughput == pytest.approx(3.0)
    assert rec.order_turnover_time == pytest.approx(16050 / 3)
    assert rec.order_offset == pytest.approx(-150 / 3)
    assert rec.late_fraction == pytest.approx(1 / 3)
    assert rec.pile_on == pytest.approx(3.0)
    assert rec.distance_traveled == pytest.approx(200.0)
    assert rec.station_idle_time == pytest.approx((0.5 + 0.75) / 2)
    assert rec.unit_throughput_score == pytest.approx(12.0 / 480.0)


def test_zero_pod_visits_reports_absent_pile_on():
    rec = compute_metrics(RunCounters(), 3600.0, bound=480.0)
    assert rec.pile_on is None
    assert rec.unit_throughput == 0.0


def test_early_completion_offset_sign():
    c = RunCounters(orders_completed=1, offset_sum=-50.0, turnover_sum=500.0)
    rec = compute_metrics(c, 3600.0, bound=1.0)
    assert rec.order_offset == -50.0


def test_csv_roundtrip_including_absent_pile_on():
    rec = compute_metrics(RunCounters(), 3600.0, bound=480.0)
    rec.poa = "PodMatch"
    rec.order_size = "Mixed"
    rec.seed = 123
    line = rec.csv_row()
    back = MetricsRecord.from_csv_row(line)
    assert back.pile_on is None
    assert back.poa == "PodMatch"
    assert back.seed == 123
    assert back.csv_row() == line
    assert len(line.split(",")) == len(MetricsRecord.csv_header().split(","))


# ------------------------------------------------------------------ pearson

def test_pearson_identity():
    xs = [1.0, 2.0, 3.0, 4.0]
    assert pearson(xs, xs) == pytest.approx(1.0)


def test_pearson_affine_antitone():
    xs = [1.0, 2.0, 3.0, 4.0]
    ys = [-2 * x + 7 for x in xs]
    assert pearson(xs, ys) == pytest.approx(-1.0)


def test_pearson_fixed_dataset_vs_covariance_oracle():
    pts = [(1, 2), (2, 1), (3, 4), (4, 3), (5, 5)]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    n = len(pts)
    mx, my = sum(xs) / n, sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in pts) / n
    sx = math.sqrt(sum((x - mx) ** 2 for x in xs) / n)
    sy = math.sqrt(sum((y - my) ** 2 for y in ys) / n)
    assert pearson(xs, ys) == pytest.approx(cov / (sx * sy), abs=1e-12)


def test_pearson_zero_variance_is_absent():
    assert pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]) is None


def test_pearson_rejects_bad_lengths():
    with pytest.raises(ValueError):
        pearson([1.0], [1.0])
    with pytest.raises(ValueError):
        pearson([1.0, 2.0], [1.0])


@given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)),
                min_size=2, max_size=40))
def test_pearson_bounded(pts):
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    r = pearson(xs, ys)
    assert r is None or -1.0 <= r <= 1.0
