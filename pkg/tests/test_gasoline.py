"""Gasoline objective, generators, ILP, rounding, and exact optimum."""

import itertools
import random
from fractions import Fraction

import pytest

from heurlab.common import BudgetExceededError, InstanceParseError
from heurlab.gasoline import (
    GasolineInstance,
    build_ilp,
    evaluate,
    gen_extension,
    gen_lorieau_1d,
    iterative_rounding,
    optimal_value,
    parse_gasoline,
    relaxation_value,
    render_gasoline,
    table3_row,
    _candidate_lp_value,
)
from heurlab.lp import LinearProgram, LpStatus, solve


def random_instance(rng: random.Random, n: int, d: int) -> GasolineInstance:
    xs = [[rng.randint(0, 6) for _ in range(d)] for _ in range(n)]
    ys = [row[:] for row in xs]
    rng.shuffle(ys)
    for _ in range(3 * n):  # decouple Y from X, keeping coordinate sums
        j = rng.randrange(d)
        a, b = rng.randrange(n), rng.randrange(n)
        if ys[a][j] > 0:
            ys[a][j] -= 1
            ys[b][j] += 1
    return GasolineInstance(tuple(map(tuple, xs)), tuple(map(tuple, ys)))


# ---------------------------------------------------------------------------
# Instance validation and the objective.


def test_instance_rejects_bad_shapes():
    with pytest.raises(ValueError):
        GasolineInstance((), ())
    with pytest.raises(ValueError):
        GasolineInstance(((1, 0),), ((1, 0), (0, 0)))
    with pytest.raises(ValueError):
        GasolineInstance(((1, 0),), ((1,),))
    with pytest.raises(ValueError):
        GasolineInstance(((-1,),), ((-1,),))
    with pytest.raises(ValueError):
        GasolineInstance(((2, 0),), ((1, 1),))


def test_evaluate_single_item():
    inst = GasolineInstance(((1, 0),), ((1, 0),))
    assert evaluate(inst, (0,)) == 1


def test_evaluate_identity_on_small_extension():
    # beta = (6, 6), alpha = (0, -2) by hand prefix computation
    inst = gen_extension(2, 2)
    assert evaluate(inst, range(6)) == 14


def test_evaluate_rejects_non_permutations():
    inst = gen_extension(2, 2)
    with pytest.raises(ValueError):
        evaluate(inst, (0, 0, 1, 2, 3, 4))
    with pytest.raises(ValueError):
        evaluate(inst, (0, 1, 2))


def test_evaluate_invariant_under_equal_item_swap():
    inst = gen_extension(2, 2)  # items 0=1 and 2=3=4 coincide
    rng = random.Random(5)
    for _ in range(20):
        perm = list(range(6))
        rng.shuffle(perm)
        swapped = [{2: 4, 4: 2}.get(p, p) for p in perm]
        assert evaluate(inst, perm) == evaluate(inst, swapped)


def test_evaluate_nonnegative_everywhere():
    rng = random.Random(11)
    inst = random_instance(rng, 5, 2)
    for perm in itertools.permutations(range(5)):
        assert evaluate(inst, perm) >= 0


# ---------------------------------------------------------------------------
# Exact optimum.


def test_optimal_single_item():
    inst = GasolineInstance(((1, 0),), ((1, 0),))
    assert optimal_value(inst) == 1


def test_optimal_small_extension():
    assert optimal_value(gen_extension(2, 2)) == 8


def test_optimal_matches_exhaustive_enumeration():
    rng = random.Random(23)
    for _ in range(6):
        inst = random_instance(rng, 6, 2)
        brute = min(
            evaluate(inst, perm) for perm in itertools.permutations(range(6))
        )
        assert optimal_value(inst) == brute
        assert optimal_value(inst, exhaustive=True) == brute


def test_optimal_is_lower_bound():
    rng = random.Random(37)
    inst = random_instance(rng, 7, 2)
    opt = optimal_value(inst)
    for _ in range(30):
        perm = list(range(7))
        rng.shuffle(perm)
        assert opt <= evaluate(inst, perm)


def test_optimal_budget_exhaustion():
    with pytest.raises(BudgetExceededError):
        optimal_value(gen_extension(2, 3), budget=0.0)


# ---------------------------------------------------------------------------
# ILP model.


def test_ilp_counts_single_cell():
    inst = GasolineInstance(((1,),), ((1,),))
    ilp = build_ilp(inst)
    assert ilp.program.nvars == 3  # one z, alpha, beta
    prefix = [
        r
        for r in ilp.program.rows
        if r[0][ilp.alpha_index(0)] != 0 or r[0][ilp.beta_index(0)] != 0
    ]
    assert len(prefix) == 2
    assert len(ilp.program.rows) == 4  # plus the row and column caps
    assert ilp.program.objective[ilp.alpha_index(0)] == -1
    assert ilp.program.objective[ilp.beta_index(0)] == 1


def test_ilp_counts_small_extension():
    ilp = build_ilp(gen_extension(2, 2))
    assert ilp.program.nvars == 36 + 4
    assert len(ilp.program.rows) == 24 + 12  # prefix pairs + sub-permutation caps
    for pos in range(6):
        for item in range(6):
            z = ilp.z_index(pos, item)
            assert ilp.program.lower[z] == 0 and ilp.program.upper[z] == 1
    for j in range(2):
        assert ilp.program.lower[ilp.alpha_index(j)] is None
        assert ilp.program.upper[ilp.beta_index(j)] is None


def test_permutation_is_feasible_in_ilp():
    inst = gen_extension(2, 2)
    ilp = build_ilp(inst)
    perm = (5, 0, 1, 2, 3, 4)
    program = ilp.program
    for pos in range(6):
        for item in range(6):
            program = __import__("heurlab.lp", fromlist=["fix_variable"]).fix_variable(
                program, ilp.z_index(pos, item), 1 if perm[pos] == item else 0
            )
    got = solve(program)
    assert got.status == LpStatus.OPTIMAL
    assert got.objective == evaluate(inst, perm)


def test_relaxation_below_optimum_below_rounding():
    for inst in (gen_extension(2, 2), random_instance(random.Random(3), 5, 2)):
        relaxed = relaxation_value(inst)
        opt = optimal_value(inst)
        rounded = iterative_rounding(inst).value
        assert relaxed <= opt <= rounded


# ---------------------------------------------------------------------------
# Iterative rounding.


def naive_candidate_value(inst: GasolineInstance, assigned: dict[int, int]) -> Fraction:
    """Unreduced transcription of the committed-prefix relaxation.

    One variable per (open position, leftover item) pair, every prefix row
    spelled out, completion forced by per-position and per-item equalities.
    Slow but direct; the production solver must match it exactly.
    """
    n, d = inst.n, inst.d
    open_pos = [t for t in range(n) if t not in assigned]
    left = [it for it in range(n) if it not in assigned.values()]
    nz = len(open_pos) * len(left)
    nvars = nz + 2 * d
    at = {(t, it): k for k, (t, it) in enumerate(itertools.product(open_pos, left))}

    yhat = [[0] * d]
    for y in inst.ys:
        yhat.append([a + b for a, b in zip(yhat[-1], y)])
    committed = [[0] * d]
    for m in range(1, n + 1):
        acc = committed[-1][:]
        if m - 1 in assigned:
            for j in range(d):
                acc[j] += inst.xs[assigned[m - 1]][j]
        committed.append(acc)

    rows = []
    for m in range(1, n + 1):
        for j in range(d):
            base = [Fraction(0)] * nvars
            for t in open_pos:
                if t <= m - 1:
                    for it in left:
                        base[at[t, it]] = Fraction(inst.xs[it][j])
            brow, arow = base[:], base[:]
            brow[nz + d + j] = Fraction(-1)
            rows.append((tuple(brow), "<=", Fraction(yhat[m - 1][j] - committed[m][j])))
            arow[nz + j] = Fraction(-1)
            rows.append((tuple(arow), ">=", Fraction(yhat[m][j] - committed[m][j])))
    for t in open_pos:
        row = [Fraction(0)] * nvars
        for it in left:
            row[at[t, it]] = Fraction(1)
        rows.append((tuple(row), "=", Fraction(1)))
    for it in left:
        row = [Fraction(0)] * nvars
        for t in open_pos:
            row[at[t, it]] = Fraction(1)
        rows.append((tuple(row), "=", Fraction(1)))

    objective = [Fraction(0)] * nvars
    lower: list = [Fraction(0)] * nz + [None] * (2 * d)
    upper: list = [Fraction(1)] * nz + [None] * (2 * d)
    for j in range(d):
        objective[nz + j] = Fraction(-1)
        objective[nz + d + j] = Fraction(1)
    got = solve(LinearProgram("min", tuple(objective), tuple(rows), lower, upper))
    assert got.status == LpStatus.OPTIMAL
    return got.objective


def test_candidate_solver_matches_naive_model():
    rng = random.Random(61)
    for trial in range(4):
        inst = random_instance(rng, 6, 2)
        items = list(range(6))
        rng.shuffle(items)
        depth = rng.randint(1, 4)
        assigned = {pos: items[pos] for pos in range(depth)}
        assert _candidate_lp_value(inst, assigned) == naive_candidate_value(
            inst, assigned
        )


def test_candidate_solver_matches_naive_on_generated():
    inst = gen_extension(2, 2)
    for item in (0, 2, 5):
        assigned = {0: item}
        assert _candidate_lp_value(inst, assigned) == naive_candidate_value(
            inst, assigned
        )


def test_rounding_single_item():
    trace = iterative_rounding(GasolineInstance(((1, 0),), ((1, 0),)))
    assert trace.permutation == (0,)
    assert trace.value == 1
    assert len(trace.steps) == 1


def test_rounding_small_extension():
    inst = gen_extension(2, 2)
    trace = iterative_rounding(inst)
    assert trace.value == 10
    assert Fraction(trace.value, optimal_value(inst)) == Fraction(5, 4)
    assert evaluate(inst, trace.permutation) == trace.value


def test_rounding_d3_extension():
    assert iterative_rounding(gen_extension(3, 2)).value == 18


def test_rounding_trace_invariants():
    rng = random.Random(97)
    for inst in (gen_extension(2, 2), random_instance(rng, 6, 2)):
        trace = iterative_rounding(inst)
        assert sorted(trace.permutation) == list(range(inst.n))
        used = set()
        for step in trace.steps:
            rows = [r for r, _ in step.candidates]
            assert set(rows) == set(range(inst.n)) - used
            values = dict(step.candidates)
            low = min(values.values())
            assert values[step.chosen_row] == low
            assert step.chosen_row == min(r for r in rows if values[r] == low)
            assert trace.permutation[step.column] == step.chosen_row
            used.add(step.chosen_row)


# ---------------------------------------------------------------------------
# Generators.


def test_lorieau_k2_exact():
    inst = gen_lorieau_1d(2)
    assert inst.xs == ((2,), (2,), (4,), (4,), (4,), (0,))
    assert inst.ys == ((2,), (2,), (3,), (3,), (3,), (3,))
    assert sum(v[0] for v in inst.xs) == 16


def test_lorieau_rejects_small_k():
    with pytest.raises(ValueError):
        gen_lorieau_1d(1)


def test_extension_k2_d2_exact():
    inst = gen_extension(2, 2)
    assert inst.xs == ((2, 4), (2, 4), (4, 0), (4, 0), (4, 0), (0, 4))
    assert inst.ys == ((2, 2), (2, 2), (3, 2), (3, 2), (3, 2), (3, 2))
    assert tuple(sum(v[j] for v in inst.xs) for j in range(2)) == (16, 12)


def test_extension_lengths():
    assert gen_extension(2, 2).n == 6
    assert gen_extension(3, 4).n == 60


def test_extension_sum_invariant():
    for d in (2, 3, 4):
        for k in (2, 3):
            inst = gen_extension(d, k)
            for j in range(d):
                assert sum(v[j] for v in inst.xs) == sum(v[j] for v in inst.ys)


def test_extension_rejects_bad_parameters():
    with pytest.raises(ValueError):
        gen_extension(1, 2)
    with pytest.raises(ValueError):
        gen_extension(2, 1)


# ---------------------------------------------------------------------------
# Benchmark rows and serialization.


def test_table3_row_small():
    row = table3_row(2, 2)
    assert (row.len_x, row.ir_value, row.opt_value) == (6, 10, 8)
    assert row.ratio == Fraction(5, 4)
    assert row.opt_within_budget


def test_table3_row_without_budget():
    row = table3_row(2, 3, opt_budget=0.0)
    assert row.ir_value == 26
    assert row.opt_value is None
    assert row.ratio is None
    assert not row.opt_within_budget


def test_serialization_round_trip():
    rng = random.Random(71)
    for _ in range(5):
        inst = random_instance(rng, rng.randint(1, 7), rng.randint(1, 3))
        assert parse_gasoline(render_gasoline(inst)) == inst


def test_parse_rejects_malformed():
    with pytest.raises(InstanceParseError):
        parse_gasoline("")
    with pytest.raises(InstanceParseError):
        parse_gasoline("2\n1 1\n")
    with pytest.raises(InstanceParseError):
        parse_gasoline("1 2\n1 0\n")
    with pytest.raises(InstanceParseError):
        parse_gasoline("1 2\n1 x\n1 0\n")
    with pytest.raises(InstanceParseError):
        parse_gasoline("1 1\n2\n1\n")  # unequal sums
