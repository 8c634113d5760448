import math
import random

import pytest
from scipy import stats

from rmfsim.inventory import Sku, build_catalog
from rmfsim.orders import (Backlog, GenerationPauses, SkuSampler, draw_sku,
                           generate_pick_order, generate_replenishment_order)


def sampler_for(weights):
    catalog = [Sku(i, 4, w) for i, w in enumerate(weights)]
    return SkuSampler(catalog)


def test_single_sku_always_chosen():
    s = sampler_for([3.5])
    rng = random.Random(0)
    assert all(s.draw(rng).id == 0 for _ in range(100))


def test_two_sku_weights_give_three_quarters():
    s = sampler_for([3.0, 1.0])
    rng = random.Random(1)
    n = 100_000
    hits = sum(1 for _ in range(n) if s.draw(rng).id == 0)
    assert hits / n == pytest.approx(0.75, abs=0.02)


def test_sku_histogram_matches_weights_chi2():
    rng = random.Random(2)
    catalog = build_catalog(1000, rng)
    s = SkuSampler(catalog)
    n = 1_000_000
    counts = [0] * len(catalog)
    for _ in range(n):
        counts[s.draw(rng).id] += 1
    total_w = sum(sku.weight for sku in catalog)
    expected = [sku.weight / total_w * n for sku in catalog]
    # merge tiny-expectation bins to keep the chi-square approximation valid
    obs, exp = [], []
    o_acc = e_acc = 0.0
    for c, e in sorted(zip(counts, expected), key=lambda t: t[1]):
        o_acc += c
        e_acc += e
        if e_acc >= 10:
            obs.append(o_acc)
            exp.append(e_acc)
            o_acc = e_acc = 0.0
    obs[-1] += o_acc
    exp[-1] += e_acc
    _, p = stats.chisquare(obs, exp)
    assert p > 0.01


def test_draw_sku_matches_sampler_distribution():
    catalog = [Sku(i, 2, w) for i, w in enumerate([1.0, 2.0, 4.0])]
    rng = random.Random(5)
    n = 50_000
    freq = [0, 0, 0]
    for _ in range(n):
        freq[draw_sku(catalog, rng).id] += 1
    assert freq[2] / n == pytest.approx(4 / 7, abs=0.02)


def test_small_orders_are_single_line_single_unit():
    rng = random.Random(3)
    s = sampler_for([1.0] * 10)
    for i in range(500):
        o = generate_pick_order(i, "Small", s, rng, now=0.0)
        assert len(o.lines) == 1
        assert sum(o.lines.values()) == 1


def test_mixed_orders_within_bounds():
    rng = random.Random(4)
    s = sampler_for([1.0] * 50)
    line_counts, unit_counts = set(), set()
    for i in range(100_000):
        o = generate_pick_order(i, "Mixed", s, rng, now=0.0)
        line_counts.add(len(o.lines))
        unit_counts.update(o.lines.values())
    assert line_counts <= {1, 2, 3, 4}
    assert unit_counts <= {1, 2, 3}
    assert {1, 4} <= line_counts   # the bounds are actually reached


def test_large_orders_have_min_two_lines_two_units():
    rng = random.Random(5)
    s = sampler_for([1.0] * 50)
    for i in range(50_000):
        o = generate_pick_order(i, "Large", s, rng, now=0.0)
        assert len(o.lines) >= 2
        assert all(u >= 2 for u in o.lines.values())


def test_large_with_one_sku_errors():
    rng = random.Random(6)
    s = sampler_for([1.0])
    with pytest.raises(ValueError):
        for _ in range(50):
            generate_pick_order(0, "Large", s, rng, now=0.0)


def test_lines_use_distinct_skus():
    rng = random.Random(7)
    s = sampler_for([10.0, 0.1, 0.1, 0.1])   # heavy collisions on sku 0
    for i in range(2000):
        o = generate_pick_order(i, "Mixed", s, rng, now=0.0)
        assert len(set(o.lines)) == len(o.lines)


def test_due_times_by_priority():
    rng = random.Random(8)
    s = sampler_for([1.0] * 5)
    orders = [generate_pick_order(i, "Mixed", s, rng, now=100.0) for i in range(4000)]
    prio = [o for o in orders if o.priority]
    norm = [o for o in orders if not o.priority]
    assert all(o.due_time == 100.0 + 1800.0 for o in prio)
    assert all(o.due_time == 100.0 + 7200.0 for o in norm)
    assert len(prio) / len(orders) == pytest.approx(0.20, abs=0.02)


def test_replenishment_units_ranges():
    rng = random.Random(9)
    s = sampler_for([1.0] * 5)
    no_returns = [generate_replenishment_order(i, i, 0.0, s, rng) for i in range(20_000)]
    assert all(4 <= o.units <= 12 for o in no_returns)
    all_returns = [generate_replenishment_order(i, i, 1.0, s, rng) for i in range(200)]
    assert all(o.units == 1 for o in all_returns)
    mixed = [generate_replenishment_order(i, i, 0.3, s, rng) for i in range(100_000)]
    single = sum(1 for o in mixed if o.units == 1)
    assert single / len(mixed) == pytest.approx(0.30, abs=0.01)


def test_pause_thresholds_with_hysteresis():
    p = GenerationPauses()
    p.update(0.90)
    assert p.repl_paused
    p.update(0.70)      # inside the band: still paused
    assert p.repl_paused
    p.update(0.60)
    assert not p.repl_paused
    p.update(0.05)
    assert p.pick_paused
    p.update(0.30)      # inside the band
    assert p.pick_paused
    p.update(0.65)
    assert not p.pick_paused


def test_backlog_constant_size_and_sequence():
    rng = random.Random(10)
    s = sampler_for([1.0] * 20)
    b = Backlog("Mixed", 0.0, s, rng, target=50)
    b.fill(0.0)
    assert len(b.pick_orders) == 50
    assert len(b.repl_orders) == 50
    taken = b.take_pick(b.pick_orders[3], now=5.0)
    assert taken.station_assign_time == 5.0
    assert len(b.pick_orders) == 50      # refilled instantly
    seqs = [o.sequence_index for o in b.repl_orders]
    assert seqs == sorted(seqs)
    head = b.repl_head()
    assert b.take_repl_head(now=6.0) is head
    assert len(b.repl_orders) == 50


def test_paused_backlog_does_not_refill():
    rng = random.Random(11)
    s = sampler_for([1.0] * 20)
    b = Backlog("Mixed", 0.0, s, rng, target=10)
    b.fill(0.0)
    b.update_pauses(0.05, now=1.0)       # pick generation pauses
    b.take_pick(b.pick_orders[0], now=2.0)
    assert len(b.pick_orders) == 9
    b.update_pauses(0.65, now=3.0)       # resumes above 60%
    assert len(b.pick_orders) == 10
