"""Exact simplex: worked examples, validation, and oracle agreement."""

import random
from fractions import Fraction
from itertools import combinations, product

import pytest

from heurlab.lp import LinearProgram, LpStatus, fix_variable, render_lp, solve


def two_var_example():
    # maximize 2x + y over x + y <= 3, x <= 2, x,y >= 0
    return LinearProgram(
        "max",
        (2, 1),
        (((1, 1), "<=", 3), ((1, 0), "<=", 2)),
    )


def test_two_var_example_optimal():
    got = solve(two_var_example())
    assert got.status == LpStatus.OPTIMAL
    assert got.objective == 5
    assert got.values == (2, 1)


def test_infeasible_interval():
    lp = LinearProgram("min", (1,), (((1,), ">=", 1), ((1,), "<=", 0)))
    assert solve(lp).status == LpStatus.INFEASIBLE


def test_unbounded_ray():
    lp = LinearProgram("max", (1,))
    assert solve(lp).status == LpStatus.UNBOUNDED


def test_unbounded_two_var_ray():
    # direction (1, 1) keeps the row tight and improves forever
    lp = LinearProgram("min", (-1, -1), (((1, -1), "<=", 1),))
    assert solve(lp).status == LpStatus.UNBOUNDED


def test_fix_variable_keeps_optimum():
    fixed = fix_variable(two_var_example(), 0, 2)
    got = solve(fixed)
    assert got.status == LpStatus.OPTIMAL
    assert got.objective == 5


def test_fix_variable_to_zero():
    got = solve(fix_variable(two_var_example(), 0, 0))
    assert got.status == LpStatus.OPTIMAL
    assert got.objective == 3
    assert got.values == (0, 3)


def test_fix_variable_outside_bounds():
    lp = LinearProgram("max", (1,), upper=(2,))
    with pytest.raises(ValueError):
        fix_variable(lp, 0, 3)


def test_fix_variable_bad_index():
    with pytest.raises(IndexError):
        fix_variable(two_var_example(), 5, 1)


def test_rejects_malformed_models():
    with pytest.raises(ValueError):
        LinearProgram("best", (1,))
    with pytest.raises(ValueError):
        LinearProgram("min", ())
    with pytest.raises(ValueError):
        LinearProgram("min", (1, 2), (((1,), "<=", 0),))
    with pytest.raises(ValueError):
        LinearProgram("min", (1,), (((1,), "<", 0),))
    with pytest.raises(ValueError):
        LinearProgram("min", (1,), lower=(3,), upper=(2,))


def test_render_mentions_every_piece():
    text = render_lp(two_var_example())
    assert "max" in text and "<= 3" in text
    assert "x0" in text and "x1" in text
    assert "[0, +inf]" in text


def test_free_variable_reaches_negative_bound():
    lp = LinearProgram("min", (1,), (((1,), ">=", -5),), lower=(None,))
    got = solve(lp)
    assert got.status == LpStatus.OPTIMAL
    assert got.objective == -5


def test_equality_row_exact():
    lp = LinearProgram(
        "min",
        (3, 5),
        (((2, 1), "=", Fraction(7, 3)), ((1, 0), "<=", 1)),
    )
    got = solve(lp)
    assert got.status == LpStatus.OPTIMAL
    assert 2 * got.values[0] + got.values[1] == Fraction(7, 3)


# ---------------------------------------------------------------------------
# Random-model machinery shared by the oracle and determinism checks.


def random_model(rng: random.Random) -> LinearProgram:
    n = rng.randint(2, 4)
    m = rng.randint(1, 6)
    sense = rng.choice(("min", "max"))
    frac = lambda: Fraction(rng.randint(-6, 6), rng.randint(1, 3))
    rows = tuple(
        (
            tuple(frac() for _ in range(n)),
            rng.choice(("<=", "<=", "=", ">=", ">=")),
            Fraction(rng.randint(-8, 12)),
        )
        for _ in range(m)
    )
    lower = tuple(Fraction(rng.randint(-3, 0)) for _ in range(n))
    upper = tuple(lo + rng.randint(1, 6) for lo in lower)
    return LinearProgram(sense, tuple(frac() for _ in range(n)), rows, lower, upper)


def _solve_square(matrix, rhs):
    """Gaussian elimination over Fractions; None when singular."""
    k = len(rhs)
    a = [list(row) + [r] for row, r in zip(matrix, rhs)]
    for col in range(k):
        pivot = next((r for r in range(col, k) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col]
        a[col] = [v / inv for v in a[col]]
        for r in range(k):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[r][k] for r in range(k)]


def _feasible(lp: LinearProgram, x) -> bool:
    for j in range(lp.nvars):
        if x[j] < lp.lower[j] or x[j] > lp.upper[j]:
            return False
    for coeffs, rel, rhs in lp.rows:
        lhs = sum(c * v for c, v in zip(coeffs, x))
        if rel == "<=" and lhs > rhs:
            return False
        if rel == ">=" and lhs < rhs:
            return False
        if rel == "=" and lhs != rhs:
            return False
    return True


def enumerate_vertices_best(lp: LinearProgram):
    """Best objective over all vertices of the (boxed, hence bounded) region.

    Every vertex makes some n constraints tight with an invertible active
    matrix, so trying all row-subset / basic-variable / bound-side choices
    visits each one. Returns (status, objective).
    """
    n, m = lp.nvars, len(lp.rows)
    best = None
    for r in range(min(n, m) + 1):
        for rowset in combinations(range(m), r):
            for basics in combinations(range(n), r):
                nonbasics = [j for j in range(n) if j not in basics]
                for mask in product((0, 1), repeat=n - r):
                    x = [None] * n
                    for j, side in zip(nonbasics, mask):
                        x[j] = lp.upper[j] if side else lp.lower[j]
                    if r:
                        matrix = [
                            [lp.rows[i][0][j] for j in basics] for i in rowset
                        ]
                        rhs = [
                            lp.rows[i][2]
                            - sum(lp.rows[i][0][j] * x[j] for j in nonbasics)
                            for i in rowset
                        ]
                        sol = _solve_square(matrix, rhs)
                        if sol is None:
                            continue
                        for j, v in zip(basics, sol):
                            x[j] = v
                    if not _feasible(lp, x):
                        continue
                    value = sum(c * v for c, v in zip(lp.objective, x))
                    if best is None:
                        best = value
                    elif lp.sense == "min":
                        best = min(best, value)
                    else:
                        best = max(best, value)
    if best is None:
        return LpStatus.INFEASIBLE, None
    return LpStatus.OPTIMAL, best


def test_matches_vertex_enumeration():
    rng = random.Random(1723)
    optimal = 0
    for _ in range(150):
        lp = random_model(rng)
        got = solve(lp)
        want_status, want_value = enumerate_vertices_best(lp)
        assert got.status == want_status
        if want_status == LpStatus.OPTIMAL:
            assert got.objective == want_value
            optimal += 1
    assert optimal > 20  # the generator must exercise both statuses


def test_optimal_solutions_satisfy_rows_exactly():
    rng = random.Random(92)
    seen = 0
    while seen < 25:
        lp = random_model(rng)
        got = solve(lp)
        if got.status != LpStatus.OPTIMAL:
            continue
        seen += 1
        assert _feasible(lp, got.values)
        assert got.objective == sum(
            c * v for c, v in zip(lp.objective, got.values)
        )


def test_deterministic_resolve():
    rng = random.Random(7)
    for _ in range(40):
        lp = random_model(rng)
        first = solve(lp)
        again = solve(
            LinearProgram(lp.sense, lp.objective, lp.rows, lp.lower, lp.upper)
        )
        assert first.status == again.status
        assert first.values == again.values
        assert first.objective == again.objective
