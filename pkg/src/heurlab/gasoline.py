"""The generalized gasoline problem: objective, ILP, iterative rounding.

Positions receive X-vectors through a permutation; the objective adds, per
coordinate, the span between the largest prefix surplus (y counted one step
behind) and the smallest prefix surplus (y counted in full).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .common import BudgetExceededError, InstanceParseError
from .lp import LinearProgram, LpStatus, solve

OPT_DEFAULT_BUDGET_SECONDS = 600.0


@dataclass(frozen=True)
class GasolineInstance:
    xs: tuple[tuple[int, ...], ...]
    ys: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        xs = tuple(tuple(int(v) for v in vec) for vec in self.xs)
        ys = tuple(tuple(int(v) for v in vec) for vec in self.ys)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if not xs or len(xs) != len(ys):
            raise ValueError("X and Y must be non-empty and equally long")
        d = len(xs[0])
        if d < 1 or any(len(v) != d for v in xs + ys):
            raise ValueError("all vectors must share one positive dimension")
        if any(c < 0 for vec in xs + ys for c in vec):
            raise ValueError("entries must be non-negative integers")
        for j in range(d):
            if sum(v[j] for v in xs) != sum(v[j] for v in ys):
                raise ValueError(f"coordinate {j} sums differ between X and Y")

    @property
    def n(self) -> int:
        return len(self.xs)

    @property
    def d(self) -> int:
        return len(self.xs[0])


def _check_permutation(perm: Sequence[int], n: int) -> list[int]:
    perm = list(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError("permutation must be a bijection on item indices")
    return perm


def evaluate(instance: GasolineInstance, permutation: Sequence[int]) -> int:
    """Objective of placing X-vector permutation[k] at position k."""
    perm = _check_permutation(permutation, instance.n)
    d = instance.d
    xhat = [0] * d
    yhat = [0] * d
    max_a = [None] * d
    min_b = [None] * d
    for k, item in enumerate(perm):
        x = instance.xs[item]
        y = instance.ys[k]
        for j in range(d):
            xhat[j] += x[j]
            a = xhat[j] - yhat[j]  # y still one step behind
            yhat[j] += y[j]
            b = xhat[j] - yhat[j]
            if max_a[j] is None or a > max_a[j]:
                max_a[j] = a
            if min_b[j] is None or b < min_b[j]:
                min_b[j] = b
    return sum(max_a[j] - min_b[j] for j in range(d))


def optimal_value(
    instance: GasolineInstance,
    budget: float = OPT_DEFAULT_BUDGET_SECONDS,
    exhaustive: bool = False,
) -> int:
    """Exact minimum over permutations.

    Branches on distinct X-vectors (equal vectors are interchangeable).
    Per-coordinate partial spans never shrink when a prefix is extended, so
    the partial objective prunes against the incumbent; two end conditions
    tighten it: the final surplus is zero (so each min is at most 0) and the
    last max-term equals y_n (so each max is at least y_n).
    """
    n, d = instance.n, instance.d
    distinct: dict[tuple[int, ...], int] = {}
    for v in instance.xs:
        distinct[v] = distinct.get(v, 0) + 1
    vecs = sorted(distinct)
    counts = [distinct[v] for v in vecs]
    yhat = [[0] * d]
    for y in instance.ys:
        yhat.append([a + b for a, b in zip(yhat[-1], y)])
    y_last = instance.ys[-1]

    best = evaluate(instance, list(range(n)))
    deadline = time.monotonic() + budget
    node_counter = 0

    max_a0 = tuple(y_last)  # the k=n max-term is exactly y_n
    min_b0 = tuple([0] * d)  # the k=n min-term is exactly 0

    def walk(pos: int, xhat: tuple[int, ...], max_a, min_b, partial: int) -> None:
        nonlocal best, node_counter
        if node_counter % 4096 == 0 and time.monotonic() > deadline:
            raise BudgetExceededError(
                "optimum search ran out of time budget", incumbent=best
            )
        node_counter += 1
        if pos == n:
            if partial < best:
                best = partial
            return
        for vi, v in enumerate(vecs):
            if counts[vi] == 0:
                continue
            new_xhat = tuple(a + b for a, b in zip(xhat, v))
            prev = yhat[pos]
            cur = yhat[pos + 1]
            new_max = tuple(
                m if m >= s else s
                for m, s in zip(max_a, (a - b for a, b in zip(new_xhat, prev)))
            )
            new_min = tuple(
                m if m <= s else s
                for m, s in zip(min_b, (a - b for a, b in zip(new_xhat, cur)))
            )
            new_partial = sum(new_max) - sum(new_min)
            if not exhaustive and new_partial >= best:
                continue
            counts[vi] -= 1
            walk(pos + 1, new_xhat, new_max, new_min, new_partial)
            counts[vi] += 1

    walk(0, tuple([0] * d), max_a0, min_b0, sum(max_a0))
    return best


# ---------------------------------------------------------------------------
# ILP model and iterative rounding.


@dataclass(frozen=True)
class GasolineIlp:
    """The displayed program: Z is binary in the ILP, [0,1] in the relaxation."""

    program: LinearProgram
    n: int
    d: int

    def z_index(self, position: int, item: int) -> int:
        return position * self.n + item

    def alpha_index(self, j: int) -> int:
        return self.n * self.n + j

    def beta_index(self, j: int) -> int:
        return self.n * self.n + self.d + j


def build_ilp(instance: GasolineInstance) -> GasolineIlp:
    """Mirrors the printed program: sub-permutation rows, free alpha/beta."""
    n, d = instance.n, instance.d
    nz = n * n
    nvars = nz + 2 * d
    objective = [Fraction(0)] * nvars
    for j in range(d):
        objective[nz + j] = Fraction(-1)  # -alpha_j
        objective[nz + d + j] = Fraction(1)  # +beta_j
    yhat = [[0] * d]
    for y in instance.ys:
        yhat.append([a + b for a, b in zip(yhat[-1], y)])

    rows = []
    for m in range(1, n + 1):
        for j in range(d):
            beta_row = [Fraction(0)] * nvars
            alpha_row = [Fraction(0)] * nvars
            for pos in range(m):
                for item in range(n):
                    c = Fraction(instance.xs[item][j])
                    beta_row[pos * n + item] = c
                    alpha_row[pos * n + item] = c
            beta_row[nz + d + j] = Fraction(-1)
            rows.append((tuple(beta_row), "<=", Fraction(yhat[m - 1][j])))
            alpha_row[nz + j] = Fraction(-1)
            rows.append((tuple(alpha_row), ">=", Fraction(yhat[m][j])))
    for pos in range(n):
        row = [Fraction(0)] * nvars
        for item in range(n):
            row[pos * n + item] = Fraction(1)
        rows.append((tuple(row), "<=", Fraction(1)))
    for item in range(n):
        row = [Fraction(0)] * nvars
        for pos in range(n):
            row[pos * n + item] = Fraction(1)
        rows.append((tuple(row), "<=", Fraction(1)))

    lower: list = [Fraction(0)] * nz + [None] * (2 * d)
    upper: list = [Fraction(1)] * nz + [None] * (2 * d)
    program = LinearProgram("min", tuple(objective), tuple(rows), tuple(lower), tuple(upper))
    return GasolineIlp(program=program, n=n, d=d)


@dataclass(frozen=True)
class IterRoundStep:
    """One fixing step.

    The algorithm works on the permutation matrix indexed [item, position]:
    step i fixes column i (position i) to a unit vector, and a candidate
    ``row`` names the item whose matrix row carries the 1.  ``candidates``
    records every item still available at that step with its relaxed-LP
    value; identical items share one LP solve and therefore one value.
    """

    column: int
    candidates: tuple[tuple[int, Fraction], ...]  # (row, relaxed LP value)
    chosen_row: int


@dataclass(frozen=True)
class IterRoundTrace:
    steps: tuple[IterRoundStep, ...]
    permutation: tuple[int, ...]  # position -> item
    value: int


def _candidate_lp_value(instance: GasolineInstance, assigned: dict[int, int]) -> Fraction:
    """Relaxed value after committing positions 0..i per `assigned`.

    The relaxation distributes the remaining items over the remaining
    positions as a fractional assignment that uses every item in full:
    each open position takes total weight at most 1 and each leftover
    item-vector group contributes exactly its multiplicity.  Equal totals
    then force every open position to weight exactly 1, so the polytope
    is the doubly-stochastic completion of the committed prefix.  A looser
    model that may leave positions empty scores candidates too
    optimistically and commits a different, better permutation than the
    one this algorithm is defined to produce.

    The model is presolved without changing its value: identical leftover
    items share one aggregated column (any aggregate splits back into unit
    columns by a transportation argument), committed prefix constraints
    fold into valid finite lower bounds on alpha/beta (leftover mass is
    non-negative, so the committed-only envelope always binds from below),
    and z <= 1 is implied by the per-position cap.  With those bounds the
    start point violates only the group-total rows, keeping phase one to a
    handful of artificials.
    """
    n, d = instance.n, instance.d
    i = len(assigned) - 1  # positions 0..i are committed
    used = set(assigned.values())
    suffix = range(i + 1, n)
    groups: dict[tuple[int, ...], int] = {}
    for item in range(n):
        if item not in used:
            v = instance.xs[item]
            groups[v] = groups.get(v, 0) + 1
    vecs = sorted(groups)
    nv = len(vecs)
    nf = len(suffix)
    nz = nf * nv
    nvars = nz + 2 * d
    alpha_at = nz
    beta_at = nz + d

    yhat = [[0] * d]
    for y in instance.ys:
        yhat.append([a + b for a, b in zip(yhat[-1], y)])

    committed = [[0] * d for _ in range(n + 1)]  # prefix of fixed contributions
    for m in range(1, n + 1):
        acc = committed[m - 1][:]
        item = assigned.get(m - 1)
        if item is not None:
            for j in range(d):
                acc[j] += instance.xs[item][j]
        committed[m] = acc

    lbeta = [
        max(committed[m][j] - yhat[m - 1][j] for m in range(1, n + 1)) for j in range(d)
    ]
    lalpha = [
        min(committed[m][j] - yhat[m][j] for m in range(1, n + 1)) for j in range(d)
    ]
    # Constraints whose prefix holds no leftover mass pin alpha from above
    # (and beta from below, which lbeta already covers exactly).
    ualpha = [
        min(committed[m][j] - yhat[m][j] for m in range(1, i + 2)) for j in range(d)
    ]

    zero_row = [0] * nvars
    rows = []
    for m in range(i + 2, n + 1):
        covered = m - 1 - i  # open positions at or before m - 1
        for j in range(d):
            beta_row = zero_row[:]
            alpha_row = zero_row[:]
            any_mass = False
            for t_idx in range(covered):
                base = t_idx * nv
                for v_idx, v in enumerate(vecs):
                    if v[j]:
                        beta_row[base + v_idx] = v[j]
                        alpha_row[base + v_idx] = v[j]
                        any_mass = True
            if not any_mass:
                ualpha[j] = min(ualpha[j], committed[m][j] - yhat[m][j])
                continue
            beta_row[beta_at + j] = -1
            rows.append((tuple(beta_row), "<=", yhat[m - 1][j] - committed[m][j]))
            alpha_row[alpha_at + j] = -1
            rows.append((tuple(alpha_row), ">=", yhat[m][j] - committed[m][j]))
    for t_idx in range(nf):
        row = zero_row[:]
        for v_idx in range(nv):
            row[t_idx * nv + v_idx] = 1
        rows.append((tuple(row), "<=", 1))
    for v_idx, v in enumerate(vecs):
        row = zero_row[:]
        for t_idx in range(nf):
            row[t_idx * nv + v_idx] = 1
        rows.append((tuple(row), "=", groups[v]))

    objective = zero_row[:]
    lower: list = [0] * nz + [None] * (2 * d)
    upper: list = [None] * nvars
    for j in range(d):
        objective[alpha_at + j] = -1
        objective[beta_at + j] = 1
        lower[alpha_at + j] = lalpha[j]
        upper[alpha_at + j] = ualpha[j]
        lower[beta_at + j] = lbeta[j]

    program = LinearProgram("min", tuple(objective), tuple(rows), tuple(lower), tuple(upper))
    result = solve(program)
    if result.status != LpStatus.OPTIMAL:  # pragma: no cover - model is always feasible
        raise RuntimeError(f"candidate LP unexpectedly {result.status}")
    return result.objective


def iterative_rounding(instance: GasolineInstance) -> IterRoundTrace:
    """Fix one column per step to the unit vector with the best relaxed LP.

    Step i decides which item occupies position i.  Every remaining item
    is tried there, the rest are relaxed to a fractional assignment that
    fills all remaining positions (see `_candidate_lp_value`), and the
    item with the smallest relaxed value wins, ties going to the smallest
    item index.  When only one distinct vector remains the completion is
    forced and its exact objective replaces the LP solve.
    """
    n = instance.n
    assigned: dict[int, int] = {}  # position -> item
    steps = []
    for pos in range(n):
        used = set(assigned.values())
        by_vec: dict[tuple[int, ...], list[int]] = {}
        for item in range(n):
            if item not in used:
                by_vec.setdefault(instance.xs[item], []).append(item)
        candidates: list[tuple[int, Fraction]] = []
        best_row = -1
        best_value = None
        if len(by_vec) == 1:
            items = next(iter(by_vec.values()))
            completion = dict(assigned)
            for p, item in zip(range(pos, n), items):
                completion[p] = item
            value = Fraction(evaluate(instance, tuple(completion[p] for p in range(n))))
            candidates = [(item, value) for item in items]
            best_row, best_value = items[0], value
        else:
            for vec in sorted(by_vec):
                members = by_vec[vec]
                assigned[pos] = members[0]
                value = _candidate_lp_value(instance, assigned)
                del assigned[pos]
                candidates.extend((item, value) for item in members)
                lead = members[0]
                if best_value is None or value < best_value or (
                    value == best_value and lead < best_row
                ):
                    best_row, best_value = lead, value
        candidates.sort()
        assigned[pos] = best_row
        steps.append(
            IterRoundStep(column=pos, candidates=tuple(candidates), chosen_row=best_row)
        )
    permutation = tuple(assigned[pos] for pos in range(n))
    return IterRoundTrace(
        steps=tuple(steps),
        permutation=permutation,
        value=evaluate(instance, permutation),
    )


def relaxation_value(instance: GasolineInstance) -> Fraction:
    """Value of the full LP relaxation (no columns fixed)."""
    result = solve(build_ilp(instance).program)
    if result.status != LpStatus.OPTIMAL:  # pragma: no cover
        raise RuntimeError(f"relaxation unexpectedly {result.status}")
    return result.objective


# ---------------------------------------------------------------------------
# Instance generators.


def _u(k: int, i: int) -> int:
    return 2**k - 2 ** (k - i)


def gen_lorieau_1d(k: int) -> GasolineInstance:
    """The one-dimensional seed instance: doubling blocks of u_i = 2^k(1-2^-i)."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    xs = []
    for i in range(1, k):
        xs.extend([(_u(k, i),)] * (2**i))
    xs.extend([(2**k,)] * (2**k - 1))
    xs.append((0,))
    ys = []
    for i in range(1, k + 1):
        ys.extend([(_u(k, i),)] * (2**i))
    return GasolineInstance(xs=tuple(xs), ys=tuple(ys))


def gen_extension(d: int, k: int) -> GasolineInstance:
    """The d-dimensional extension: first coordinate carries the 1-d blocks,
    the others alternate a 4 (in X) against a 2 (in Y) per extra axis."""
    if d < 2 or k < 2:
        raise ValueError(f"need d >= 2 and k >= 2, got ({d}, {k})")

    def vec(first: int, axis: int | None = None, extra: int = 0) -> tuple[int, ...]:
        out = [0] * d
        out[0] = first
        if axis is not None:
            out[axis] = extra
        return tuple(out)

    xs = []
    for i in range(1, k):
        for _ in range(2**i):
            for j in range(1, d):
                xs.append(vec(_u(k, i), j, 4))
    for j in range(1, d):
        for _ in range(2**k - 1):
            xs.append(vec(2**k))
        xs.append(vec(0, j, 4))
    ys = []
    for i in range(1, k + 1):
        for _ in range(2**i):
            for j in range(1, d):
                ys.append(vec(_u(k, i), j, 2))
    return GasolineInstance(xs=tuple(xs), ys=tuple(ys))


@dataclass(frozen=True)
class Table3Row:
    d: int
    k: int
    len_x: int
    ir_value: int
    opt_value: int | None
    ratio: Fraction | None
    opt_within_budget: bool


def table3_row(d: int, k: int, opt_budget: float = OPT_DEFAULT_BUDGET_SECONDS) -> Table3Row:
    """One benchmark row: instance size, rounding value, optionally the optimum."""
    instance = gen_extension(d, k)
    trace = iterative_rounding(instance)
    try:
        opt = optimal_value(instance, budget=opt_budget)
        within = True
    except BudgetExceededError:
        opt, within = None, False
    ratio = Fraction(trace.value, opt) if opt else None
    return Table3Row(
        d=d,
        k=k,
        len_x=instance.n,
        ir_value=trace.value,
        opt_value=opt,
        ratio=ratio,
        opt_within_budget=within,
    )


# ---------------------------------------------------------------------------
# Serialization: header `n d`, then n lines of X and n lines of Y.


def parse_gasoline(text: str) -> GasolineInstance:
    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
    if not lines:
        raise InstanceParseError("empty gasoline file")
    header = lines[0].split()
    if len(header) != 2:
        raise InstanceParseError("header must be `n d`")
    try:
        n, d = int(header[0]), int(header[1])
    except ValueError as exc:
        raise InstanceParseError(f"bad header: {exc}") from exc
    if len(lines) != 1 + 2 * n:
        raise InstanceParseError(f"expected {2 * n} vector lines, got {len(lines) - 1}")
    vectors = []
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split()
        if len(parts) != d:
            raise InstanceParseError(f"line {lineno}: expected {d} entries")
        try:
            vectors.append(tuple(int(p) for p in parts))
        except ValueError as exc:
            raise InstanceParseError(f"line {lineno}: {exc}") from exc
    try:
        return GasolineInstance(xs=tuple(vectors[:n]), ys=tuple(vectors[n:]))
    except ValueError as exc:
        raise InstanceParseError(str(exc)) from exc


def render_gasoline(instance: GasolineInstance) -> str:
    lines = [f"{instance.n} {instance.d}"]
    for vec in instance.xs + instance.ys:
        lines.append(" ".join(str(v) for v in vec))
    return "\n".join(lines) + "\n"
