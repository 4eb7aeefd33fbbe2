"""Pareto-set sweep for bi-criteria knapsack and the super-polynomial family.

Weights and profits are exact rationals throughout; the hard instances rely on
scaling factors with denominators 2^i(2^k-1), which floats would destroy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable

from .common import BudgetExceededError, InstanceParseError, format_fraction, parse_fraction

BRUTE_FORCE_MAX_ITEMS = 22


class CountingMode(Enum):
    """How a Pareto set is counted.

    DISTINCT_VALUE_PAIRS collapses solutions sharing (weight, profit) into one
    entry, the count that matters for the sweep's running time.
    DISTINCT_SUBSETS counts every non-dominated index subset; subsets with
    equal value pairs do not dominate each other (domination needs one strict
    inequality), so each contributes.
    """

    DISTINCT_SUBSETS = "subsets"
    DISTINCT_VALUE_PAIRS = "pairs"


DEFAULT_MODE = CountingMode.DISTINCT_VALUE_PAIRS


@dataclass(frozen=True)
class KnapsackItem:
    weight: Fraction
    profit: Fraction

    def __post_init__(self):
        object.__setattr__(self, "weight", Fraction(self.weight))
        object.__setattr__(self, "profit", Fraction(self.profit))
        if self.weight <= 0 or self.profit <= 0:
            raise ValueError(f"item needs positive weight and profit, got {self}")


@dataclass(frozen=True)
class KnapsackInstance:
    items: tuple[KnapsackItem, ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "items",
            tuple(
                it if isinstance(it, KnapsackItem) else KnapsackItem(*it)
                for it in self.items
            ),
        )

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class ParetoEntry:
    """One non-dominated (weight, profit) value class.

    multiplicity = number of index subsets achieving this pair (all of them are
    Pareto-optimal together); witness is one representative subset if tracked.
    """

    weight: Fraction
    profit: Fraction
    multiplicity: int = 1
    witness: tuple[int, ...] | None = None


@dataclass(frozen=True)
class ParetoSet:
    entries: tuple[ParetoEntry, ...]
    mode: CountingMode = DEFAULT_MODE

    @property
    def size(self) -> int:
        if self.mode is CountingMode.DISTINCT_SUBSETS:
            return sum(e.multiplicity for e in self.entries)
        return len(self.entries)

    def value_pairs(self) -> set[tuple[Fraction, Fraction]]:
        return {(e.weight, e.profit) for e in self.entries}

    def validate(self) -> None:
        """Pairwise domination check; cheap enough for test-sized sets."""
        es = self.entries
        for i, a in enumerate(es):
            for b in es[i + 1 :]:
                if _dominates(a, b) or _dominates(b, a):
                    raise AssertionError(f"dominated entry present: {a} vs {b}")
                if (a.weight, a.profit) == (b.weight, b.profit):
                    raise AssertionError("duplicate value pair stored")


def _dominates(a: ParetoEntry, b: ParetoEntry) -> bool:
    return (
        a.weight <= b.weight
        and a.profit >= b.profit
        and (a.weight < b.weight or a.profit > b.profit)
    )


@dataclass(frozen=True)
class SweepResult:
    sizes: tuple[int, ...]
    final: ParetoSet


def _scaled_items(instance: KnapsackInstance) -> tuple[list[tuple[int, int]], int]:
    """Scale all weights/profits by a common denominator so the sweep runs on ints."""
    scale = 1
    for it in instance:
        scale = scale * it.weight.denominator // math.gcd(scale, it.weight.denominator)
        scale = scale * it.profit.denominator // math.gcd(scale, it.profit.denominator)
    scaled = [
        (int(it.weight * scale), int(it.profit * scale)) for it in instance
    ]
    return scaled, scale


def _filter_sorted(candidates: Iterable[tuple[int, int, int, int]]) -> list[list]:
    """Keep the Pareto frontier of candidates sorted by (weight asc, profit desc).

    Equal (weight, profit) classes merge (multiplicities add); everything whose
    profit does not strictly beat the running best is dominated.
    """
    kept: list[list] = []
    best_profit = None
    for w, p, m, wit in candidates:
        if kept and kept[-1][0] == w and kept[-1][1] == p:
            kept[-1][2] += m
        elif best_profit is None or p > best_profit:
            kept.append([w, p, m, wit])
            best_profit = p
    return kept


def _merge_step(frontier: list[list], item: tuple[int, int], index: int, witnesses: bool):
    """One merge-and-filter step: frontier of P_i -> frontier of P_{i+1}."""
    dw, dp = item
    bit = (1 << index) if witnesses else 0
    ia, ib = 0, 0
    na, nb = len(frontier), len(frontier)

    def shifted(e):
        return (e[0] + dw, e[1] + dp, e[2], e[3] | bit)

    merged = []
    while ia < na and ib < nb:
        a = frontier[ia]
        b = shifted(frontier[ib])
        # order by weight asc, profit desc so equal pairs land adjacent
        if (a[0], -a[1]) <= (b[0], -b[1]):
            merged.append(tuple(a))
            ia += 1
        else:
            merged.append(b)
            ib += 1
    while ia < na:
        merged.append(tuple(frontier[ia]))
        ia += 1
    while ib < nb:
        merged.append(shifted(frontier[ib]))
        ib += 1
    return _filter_sorted(merged)


def _mask_to_indices(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _to_pareto_set(frontier: list[list], scale: int, mode: CountingMode, witnesses: bool) -> ParetoSet:
    entries = tuple(
        ParetoEntry(
            weight=Fraction(w, scale),
            profit=Fraction(p, scale),
            multiplicity=m,
            witness=_mask_to_indices(wit) if witnesses else None,
        )
        for w, p, m, wit in frontier
    )
    return ParetoSet(entries=entries, mode=mode)


def nu_pareto_sweep(
    instance: KnapsackInstance,
    mode: CountingMode = DEFAULT_MODE,
    witnesses: bool = False,
) -> SweepResult:
    """Iterative Pareto-set computation over item prefixes.

    Returns the per-prefix sizes [|P_1|, ..., |P_n|] under the requested
    counting mode plus the final Pareto set. P_{i+1} is built from P_i by
    adding item i+1 to every entry, merging the two weight-sorted frontiers,
    and dropping dominated value classes.
    """
    instance = _as_instance(instance)
    scaled, scale = _scaled_items(instance)
    frontier: list[list] = [[0, 0, 1, 0]]  # the empty subset
    sizes = []
    for index, item in enumerate(scaled):
        frontier = _merge_step(frontier, item, index, witnesses)
        if mode is CountingMode.DISTINCT_SUBSETS:
            sizes.append(sum(e[2] for e in frontier))
        else:
            sizes.append(len(frontier))
    return SweepResult(
        sizes=tuple(sizes),
        final=_to_pareto_set(frontier, scale, mode, witnesses),
    )


def brute_force_pareto(
    instance: KnapsackInstance,
    mode: CountingMode = DEFAULT_MODE,
    witnesses: bool = False,
) -> ParetoSet:
    """Reference oracle: enumerate all 2^n subsets and filter dominated ones."""
    instance = _as_instance(instance)
    n = len(instance)
    if n > BRUTE_FORCE_MAX_ITEMS:
        raise BudgetExceededError(
            f"brute force capped at {BRUTE_FORCE_MAX_ITEMS} items, got {n}"
        )
    scaled, scale = _scaled_items(instance)
    total = 1 << n
    weights = [0] * total
    profits = [0] * total
    for mask in range(1, total):
        low = mask & -mask
        rest = mask ^ low
        w, p = scaled[low.bit_length() - 1]
        weights[mask] = weights[rest] + w
        profits[mask] = profits[rest] + p
    order = sorted(range(total), key=lambda m: (weights[m], -profits[m]))
    frontier = _filter_sorted(
        (weights[m], profits[m], 1, m if witnesses else 0) for m in order
    )
    return _to_pareto_set(frontier, scale, mode, witnesses)


def knapsack_score(instance: KnapsackInstance, mode: CountingMode = DEFAULT_MODE) -> Fraction:
    """max_i |P_i| / |P_n| — how much larger an intermediate Pareto set gets."""
    result = nu_pareto_sweep(instance, mode)
    return Fraction(max(result.sizes), result.sizes[-1])


# ---------------------------------------------------------------------------
# Instance families


def gen_segment_I(a: int, b: int) -> list[KnapsackItem]:
    """Items (2^t, 2^t) for t = a..b."""
    if not 1 <= a <= b:
        raise ValueError(f"segment needs 1 <= a <= b, got a={a} b={b}")
    return [KnapsackItem(Fraction(2**t), Fraction(2**t)) for t in range(a, b + 1)]


def gen_segment_J(d: int, n: int) -> list[KnapsackItem]:
    """Items (x_i 2^d, x_i (2^d - 1)) with x_i = 1 + 2^{-i}/(2^d - 1), i = 1..n."""
    if d < 1:
        raise ValueError(f"segment needs d >= 1, got d={d}")
    if n < 1:
        raise ValueError(f"segment needs n >= 1, got n={n}")
    items = []
    base = Fraction(2**d - 1)
    for i in range(1, n + 1):
        x = 1 + Fraction(1, 2**i) / base
        items.append(KnapsackItem(x * 2**d, x * (2**d - 1)))
    return items


def _check_segment_params(a: int, b: int, d: int, n: int) -> None:
    if not (1 <= d < a <= b):
        raise ValueError(f"need 1 <= d < a <= b, got a={a} b={b} d={d}")
    if n < 1:
        raise ValueError(f"need n >= 1, got n={n}")


def _check_family_params(n: int, k: int) -> None:
    if k < 1 or n < 1:
        raise ValueError(f"need n, k >= 1, got n={n} k={k}")
    if 2**k > Fraction(n, 2):
        raise ValueError(f"family needs 2^k <= n/2, got n={n} k={k}")


def gen_instance_I1(n: int, k: int) -> KnapsackInstance:
    """Power segment a=2k..2k+n followed by the near-power segment with d=k."""
    _check_family_params(n, k)
    return KnapsackInstance(tuple(gen_segment_I(2 * k, 2 * k + n) + gen_segment_J(k, n)))


def gen_instance_I2(n: int, k: int) -> KnapsackInstance:
    """The first family plus the descending filler powers 2^{2k-1}, ..., 2^{k+1}.

    Appending them lets every missing low power be composed, which collapses
    the final Pareto set while the largest intermediate one stays put.
    """
    _check_family_params(n, k)
    extra = [
        KnapsackItem(Fraction(2**t), Fraction(2**t))
        for t in range(2 * k - 1, k, -1)
    ]
    return KnapsackInstance(tuple(list(gen_instance_I1(n, k).items) + extra))


def pareto_size_formula(a: int, b: int, d: int, n: int) -> int:
    """Closed-form Pareto-set size of [I-segment(a,b), J-segment(d,n)]."""
    _check_segment_params(a, b, d, n)
    cap = min(n, 2 ** (a - d) - 1)
    return (2 ** (b - a + 1) - 1) * sum(math.comb(n, i) for i in range(cap + 1)) + 2**n


def ratio_bounds(n: int, k: int) -> Fraction:
    """Exact lower bound on |P(I1)|/|P(I2)| for the (n, k) family.

    With k = log2(sqrt(n)) + 1 the bound grows like n^((sqrt(n)-3)/2); that
    asymptotic claim is documented here, not asserted numerically.
    """
    _check_family_params(n, k)
    return (
        Fraction(2 ** (n + 1) - 1, 2 ** (k + n) - 1)
        * Fraction(n, 2**k - 1) ** (2**k - 1)
        * Fraction(1, n + 2)
    )


def family_size_ratio(n: int, k: int) -> Fraction:
    """Exact |P(I1)|/|P(I2)| via the closed form (no enumeration needed)."""
    _check_family_params(n, k)
    return Fraction(
        pareto_size_formula(2 * k, 2 * k + n, k, n),
        pareto_size_formula(k + 1, 2 * k + n, k, n),
    )


# ---------------------------------------------------------------------------
# Serialization: one `weight profit` pair per line, exact fractions.


def parse_knapsack(text: str) -> KnapsackInstance:
    items = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InstanceParseError(f"line {lineno}: expected 'weight profit', got {line!r}")
        items.append(KnapsackItem(parse_fraction(parts[0]), parse_fraction(parts[1])))
    if not items:
        raise InstanceParseError("no items in knapsack instance")
    return KnapsackInstance(tuple(items))


def render_knapsack(instance: KnapsackInstance) -> str:
    return "".join(
        f"{format_fraction(it.weight)} {format_fraction(it.profit)}\n" for it in instance
    )


def _as_instance(instance) -> KnapsackInstance:
    if isinstance(instance, KnapsackInstance):
        return instance
    return KnapsackInstance(tuple(instance))
