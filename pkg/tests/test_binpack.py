import itertools
from fractions import Fraction as F

import pytest

from heurlab.binpack import (
    BinPackingInstance,
    PackingResult,
    best_fit,
    exact_best_fit_expectation,
    first_fit,
    gen_coprime_construction,
    optimal_bins,
    parse_binpack,
    random_order_score,
    render_binpack,
)
from heurlab.common import BudgetExceededError, InstanceParseError, SplitMix64


def inst(capacity, items):
    return BinPackingInstance(F(capacity), tuple(F(s) for s in items))


def brute_min_bins(instance):
    """Oracle: try every assignment with canonical bin numbering."""
    cap, sizes = instance.scaled()
    n = len(sizes)
    best = n

    def go(i, loads):
        nonlocal best
        if len(loads) >= best:
            return
        if i == n:
            best = len(loads)
            return
        for b in range(len(loads)):
            if loads[b] + sizes[i] <= cap:
                loads[b] += sizes[i]
                go(i + 1, loads)
                loads[b] -= sizes[i]
        loads.append(sizes[i])
        go(i + 1, loads)
        loads.pop()

    go(0, [])
    return best


def brute_expectation(instance):
    """Oracle: average best_fit bin count over all n! index orders."""
    n = len(instance)
    total = F(0)
    count = 0
    for order in itertools.permutations(range(n)):
        total += best_fit(instance, order).bin_count
        count += 1
    return total / count


def test_best_fit_fractional_example():
    r = best_fit(inst(1, ["0.4", "0.5", "0.6"]), [0, 1, 2])
    assert r.bin_count == 2
    assert r.assignment == (0, 0, 1)
    assert r.loads == (F(9, 10), F(3, 5))


def test_best_fit_integer_example():
    r = best_fit(inst(6, [3, 2, 3, 2, 2]), range(5))
    assert r.bin_count == 3
    assert r.loads == (F(5), F(5), F(2))


def test_single_item():
    r = best_fit(inst(1, ["0.7"]), [0])
    assert r.bin_count == 1 and r.loads == (F(7, 10),)
    assert first_fit(inst(1, ["0.7"]), [0]).bin_count == 1


def test_first_fit_examples():
    assert first_fit(inst(1, ["0.4", "0.5", "0.6"]), [0, 1, 2]).bin_count == 2
    r = first_fit(inst(1, ["0.6", "0.5", "0.4"]), [0, 1, 2])
    assert r.bin_count == 2
    assert r.assignment == (0, 1, 0)
    assert r.loads == (F(1), F(1, 2))


def test_best_fit_prefers_fullest_not_first():
    # after 5 and 6 are placed, item 4 fits both bins; BF tops up the 6
    i = inst(10, [5, 6, 4])
    assert best_fit(i, [0, 1, 2]).loads == (F(5), F(10))
    assert first_fit(i, [0, 1, 2]).loads == (F(9), F(6))


def test_order_must_be_permutation():
    i = inst(1, ["0.4", "0.5"])
    with pytest.raises(ValueError):
        best_fit(i, [0, 0])
    with pytest.raises(ValueError):
        first_fit(i, [0])
    with pytest.raises(ValueError):
        best_fit(i, [1, 2])


def test_instance_validation():
    with pytest.raises(ValueError):
        BinPackingInstance(F(0), (F(1),))
    with pytest.raises(ValueError):
        BinPackingInstance(F(1), (F(0),))
    with pytest.raises(ValueError):
        BinPackingInstance(F(1), (F(3, 2),))
    with pytest.raises(ValueError):
        BinPackingInstance(F(1), ())


def test_packing_result_validation():
    with pytest.raises(ValueError):
        PackingResult(bin_count=2, assignment=(0, 0), loads=(F(1),))
    with pytest.raises(ValueError):
        PackingResult(bin_count=2, assignment=(0, 2), loads=(F(1), F(1)))


def test_optimal_bins_examples():
    assert optimal_bins(gen_coprime_construction(6)) == 2
    mixed = inst(1, ["0.114"] * 7 + ["0.2", "0.6"] + ["0.08"] * 5)
    assert optimal_bins(mixed) == 2
    assert optimal_bins(inst(1, ["0.3"])) == 1


def test_optimal_bins_budget():
    big = inst(100, [1] * 25)
    with pytest.raises(BudgetExceededError):
        optimal_bins(big)
    assert optimal_bins(big, budget=25) == 1


def test_optimal_bins_matches_brute_force():
    rng = SplitMix64(20260814)
    for _ in range(40):
        n = 3 + rng.below(4)
        cap = 20 + rng.below(30)
        items = [1 + rng.below(cap) for _ in range(n)]
        i = inst(cap, items)
        assert optimal_bins(i) == brute_min_bins(i)


def test_heuristics_bounded_by_optimum():
    rng = SplitMix64(99)
    for _ in range(30):
        n = 3 + rng.below(5)
        cap = 10 + rng.below(20)
        items = [1 + rng.below(cap) for _ in range(n)]
        i = inst(cap, items)
        opt = optimal_bins(i)
        order = list(range(n))
        rng.shuffle(order)
        for algo in (best_fit, first_fit):
            r = algo(i, order)
            assert opt <= r.bin_count <= n
            assert all(0 < load <= i.capacity for load in r.loads)
            assert sum(r.loads) == sum(i.items)


def test_coprime_construction_m2():
    c = gen_coprime_construction(2)
    assert c.capacity == 6
    assert c.items == (F(3), F(3), F(2), F(2), F(2))


def test_coprime_construction_m6_normalized():
    c = gen_coprime_construction(6)
    assert c.capacity == 42 and len(c.items) == 13
    normalized = sorted(s / c.capacity for s in c.items)
    assert normalized == [F(1, 7)] * 7 + [F(1, 6)] * 6


def test_coprime_construction_rejects_m1():
    with pytest.raises(ValueError):
        gen_coprime_construction(1)


@pytest.mark.parametrize("m", [2, 3])
def test_two_bin_packings_never_mix_sizes(m):
    # 2 bins force the segregated split; any mixed bin needs a third
    c = gen_coprime_construction(m)
    cap, sizes = c.scaled()
    n = len(sizes)
    for mask in range(2 ** (n - 1)):
        first = [sizes[i] for i in range(n) if not (mask >> i) & 1]
        second = [sizes[i] for i in range(n) if (mask >> i) & 1]
        if sum(first) <= cap and sum(second) <= cap:
            assert len(set(first)) <= 1 and len(set(second)) <= 1


def test_random_order_score_deterministic():
    c = gen_coprime_construction(4)
    a = random_order_score(c, 500, seed=11)
    b = random_order_score(c, 500, seed=11)
    assert a == b
    assert a != random_order_score(c, 500, seed=12)


def test_random_order_score_equal_items_is_exactly_one():
    i = inst(1, [F(1, 4)] * 8)
    rep = random_order_score(i, 50, seed=0)
    assert rep.score == 1.0
    assert rep.mean_bins == 2


def test_random_order_score_m6_range():
    rep = random_order_score(gen_coprime_construction(6), 10_000, seed=1)
    assert 1.45 <= rep.score <= 1.50
    assert rep.opt_bins == 2
    assert rep.mean_bins >= rep.opt_bins
    assert rep.standard_error > 0


def test_random_order_score_report_invariants():
    c = gen_coprime_construction(3)
    rep = random_order_score(c, 200, seed=5)
    assert rep.opt_bins <= rep.mean_bins <= len(c)
    assert rep.score >= 1.0
    assert rep.trials == 200 and rep.seed == 5


def test_random_order_score_needs_trials():
    with pytest.raises(ValueError):
        random_order_score(gen_coprime_construction(2), 0, seed=1)


def test_exact_expectation_against_permutation_oracle():
    cases = [
        gen_coprime_construction(2),
        inst(10, [5, 5, 6, 4]),
        inst(1, ["0.5", "0.5", "0.3", "0.4"]),
    ]
    for i in cases:
        assert exact_best_fit_expectation(i) == brute_expectation(i)


def test_exact_expectation_order_invariant_instance():
    assert exact_best_fit_expectation(inst(1, [F(1, 2)] * 4)) == 2


def test_exact_expectation_budget():
    with pytest.raises(BudgetExceededError):
        exact_best_fit_expectation(inst(100, [1] * 10))


def test_monte_carlo_agrees_with_exact_expectation():
    for fixture, seed in [
        (gen_coprime_construction(2), 7),
        (inst(10, [6, 5, 4, 4, 3, 2, 2]), 3),
    ]:
        exact = exact_best_fit_expectation(fixture)
        rep = random_order_score(fixture, 10_000, seed=seed)
        assert abs(float(rep.mean_bins) - float(exact)) <= 4 * rep.standard_error


def test_parse_render_roundtrip():
    c = gen_coprime_construction(3)
    assert parse_binpack(render_binpack(c)) == c
    text = "# capacity then items\n1\n0.4\n1/2\n"
    i = parse_binpack(text)
    assert i.capacity == 1 and i.items == (F(2, 5), F(1, 2))


def test_parse_errors():
    with pytest.raises(InstanceParseError):
        parse_binpack("1\n")  # no items
    with pytest.raises(InstanceParseError):
        parse_binpack("1\n0.4 0.5\n")  # two numbers on one line
    with pytest.raises(InstanceParseError):
        parse_binpack("1\nabc\n")
    with pytest.raises(InstanceParseError):
        parse_binpack("1\n2\n")  # item exceeds capacity
