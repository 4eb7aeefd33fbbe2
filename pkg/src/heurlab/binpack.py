"""Online bin packing heuristics, exact optimum, and random-order scoring.

Sizes are exact rationals; internally most routines run on integer-scaled
sizes so Monte-Carlo loops never touch Fraction arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .common import (
    BudgetExceededError,
    InstanceParseError,
    SplitMix64,
    format_fraction,
    parse_fraction,
)

OPTIMAL_BINS_MAX_ITEMS = 24
EXACT_EXPECTATION_MAX_ITEMS = 9


@dataclass(frozen=True)
class BinPackingInstance:
    capacity: Fraction
    items: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "capacity", Fraction(self.capacity))
        object.__setattr__(self, "items", tuple(Fraction(s) for s in self.items))
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        for s in self.items:
            if not 0 < s <= self.capacity:
                raise ValueError(f"item size {s} outside (0, capacity]")
        if not self.items:
            raise ValueError("instance needs at least one item")

    def __len__(self) -> int:
        return len(self.items)

    def scaled(self) -> tuple[int, list[int]]:
        """Common-denominator integer view: (capacity, sizes)."""
        scale = self.capacity.denominator
        for s in self.items:
            scale = scale * s.denominator // math.gcd(scale, s.denominator)
        return int(self.capacity * scale), [int(s * scale) for s in self.items]


@dataclass(frozen=True)
class PackingResult:
    bin_count: int
    assignment: tuple[int, ...]  # item index -> bin index
    loads: tuple[Fraction, ...]

    def __post_init__(self):
        if self.bin_count != len(self.loads):
            raise ValueError("bin_count disagrees with loads")
        if sorted(set(self.assignment)) != list(range(self.bin_count)):
            raise ValueError("bin indices must be contiguous from 0 and non-empty")


@dataclass(frozen=True)
class MonteCarloReport:
    trials: int
    mean_bins: Fraction
    standard_error: float
    seed: int
    opt_bins: int
    score: float


def _check_order(order: Sequence[int], n: int) -> list[int]:
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of item indices")
    return order


def _simulate(capacity: int, sizes: list[int], order: Sequence[int], best: bool):
    """Shared Best-Fit / First-Fit simulation on integer-scaled sizes."""
    loads: list[int] = []
    assignment = [0] * len(sizes)
    for idx in order:
        s = sizes[idx]
        chosen = -1
        if best:
            chosen_load = -1
            for b, load in enumerate(loads):
                if load + s <= capacity and load > chosen_load:
                    chosen, chosen_load = b, load
        else:
            for b, load in enumerate(loads):
                if load + s <= capacity:
                    chosen = b
                    break
        if chosen < 0:
            chosen = len(loads)
            loads.append(0)
        loads[chosen] += s
        assignment[idx] = chosen
    return loads, assignment


def _pack(instance: BinPackingInstance, order: Sequence[int], best: bool) -> PackingResult:
    order = _check_order(order, len(instance))
    capacity, sizes = instance.scaled()
    loads, assignment = _simulate(capacity, sizes, order, best)
    scale = Fraction(capacity, instance.capacity)
    return PackingResult(
        bin_count=len(loads),
        assignment=tuple(assignment),
        loads=tuple(Fraction(load) / scale for load in loads),
    )


def best_fit(instance: BinPackingInstance, order: Sequence[int]) -> PackingResult:
    """Each item goes to the fullest bin it fits into (ties: lowest index)."""
    return _pack(instance, order, best=True)


def first_fit(instance: BinPackingInstance, order: Sequence[int]) -> PackingResult:
    """Each item goes to the lowest-index bin it fits into."""
    return _pack(instance, order, best=False)


def optimal_bins(instance: BinPackingInstance, budget: int = OPTIMAL_BINS_MAX_ITEMS) -> int:
    """Exact minimum bin count by branch-and-bound.

    Items are placed in descending size order; branches try each distinct
    existing load once (equal-load bins are interchangeable) plus a single
    new bin. Pruned by bins + ceil((remaining - free)/capacity) >= incumbent.
    """
    n = len(instance)
    if n > budget:
        raise BudgetExceededError(f"optimal_bins capped at {budget} items, got {n}")
    capacity, sizes = instance.scaled()
    sizes = sorted(sizes, reverse=True)

    # first-fit-decreasing incumbent
    ffd_loads, _ = _simulate(capacity, sizes, range(n), best=False)
    best_known = len(ffd_loads)
    lower = -(-sum(sizes) // capacity)
    if best_known == lower:
        return best_known

    suffix_sum = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_sum[i] = suffix_sum[i + 1] + sizes[i]

    loads: list[int] = []

    def walk(i: int) -> None:
        nonlocal best_known
        if i == n:
            best_known = min(best_known, len(loads))
            return
        used = len(loads)
        free = used * capacity - (sum(loads))
        needed = max(0, -(-(suffix_sum[i] - free) // capacity))
        if used + needed >= best_known:
            return
        s = sizes[i]
        seen = set()
        for b in range(used):
            load = loads[b]
            if load + s <= capacity and load not in seen:
                seen.add(load)
                loads[b] += s
                walk(i + 1)
                loads[b] -= s
        if used + 1 < best_known:
            loads.append(s)
            walk(i + 1)
            loads.pop()

    walk(0)
    return best_known


def gen_coprime_construction(m: int) -> BinPackingInstance:
    """Capacity m(m+1); m items of size m+1 and m+1 items of size m.

    Any bin mixing the two sizes holds am + b(m+1) = m(m+1) only for
    (a, b) = (m+1, 0) or (0, m), so a mixed packing needs a third bin while
    the segregated packing uses exactly two.
    """
    if m < 2:
        raise ValueError(f"construction needs m >= 2, got {m}")
    cap = Fraction(m * (m + 1))
    items = tuple([Fraction(m + 1)] * m + [Fraction(m)] * (m + 1))
    return BinPackingInstance(capacity=cap, items=items)


def random_order_score(
    instance: BinPackingInstance,
    trials: int,
    seed: int,
    opt: int | None = None,
) -> MonteCarloReport:
    """Mean Best-Fit bin count over uniformly random orders, divided by OPT.

    Trial i shuffles with its own generator derived from (seed, i), so a
    parallel split of the trial range would reproduce the serial report.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if opt is None:
        opt = optimal_bins(instance)
    capacity, sizes = instance.scaled()
    n = len(sizes)
    counts = []
    for trial in range(trials):
        rng = SplitMix64(seed, stream=trial)
        order = list(range(n))
        rng.shuffle(order)
        loads, _ = _simulate(capacity, sizes, order, best=True)
        counts.append(len(loads))
    total = sum(counts)
    mean = Fraction(total, trials)
    if trials > 1:
        mu = total / trials
        var = sum((c - mu) ** 2 for c in counts) / (trials - 1)
        se = math.sqrt(var / trials)
    else:
        se = 0.0
    return MonteCarloReport(
        trials=trials,
        mean_bins=mean,
        standard_error=se,
        seed=seed,
        opt_bins=opt,
        score=float(mean) / opt,
    )


def exact_best_fit_expectation(instance: BinPackingInstance) -> Fraction:
    """Exact expected Best-Fit bin count over all item orderings.

    Works on the multiset of sizes: conditioning on which distinct size comes
    next gives a small memoized recursion instead of n! orderings. Valid
    because the final bin count only depends on the multiset of loads.
    """
    if len(instance) > EXACT_EXPECTATION_MAX_ITEMS:
        raise BudgetExceededError(
            f"exact expectation capped at {EXACT_EXPECTATION_MAX_ITEMS} items"
        )
    capacity, sizes = instance.scaled()
    distinct = sorted(set(sizes))
    start_counts = tuple(sizes.count(v) for v in distinct)

    @lru_cache(maxsize=None)
    def expect(counts: tuple[int, ...], loads: tuple[int, ...]) -> Fraction:
        remaining = sum(counts)
        if remaining == 0:
            return Fraction(len(loads))
        acc = Fraction(0)
        for vi, cnt in enumerate(counts):
            if cnt == 0:
                continue
            s = distinct[vi]
            # best-fit placement on the load multiset
            fitting = [load for load in loads if load + s <= capacity]
            if fitting:
                target = max(fitting)
                new_loads = list(loads)
                new_loads.remove(target)
                new_loads.append(target + s)
            else:
                new_loads = list(loads) + [s]
            next_counts = counts[:vi] + (cnt - 1,) + counts[vi + 1 :]
            acc += Fraction(cnt, remaining) * expect(next_counts, tuple(sorted(new_loads)))
        return acc

    return expect(start_counts, ())


# ---------------------------------------------------------------------------
# Serialization: first line capacity, then one size per line.


def parse_binpack(text: str) -> BinPackingInstance:
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if len(line.split()) != 1:
            raise InstanceParseError(f"line {lineno}: expected one number, got {line!r}")
        values.append(parse_fraction(line))
    if len(values) < 2:
        raise InstanceParseError("bin packing file needs a capacity line and items")
    try:
        return BinPackingInstance(capacity=values[0], items=tuple(values[1:]))
    except ValueError as exc:
        raise InstanceParseError(str(exc)) from exc


def render_binpack(instance: BinPackingInstance) -> str:
    lines = [format_fraction(instance.capacity)]
    lines += [format_fraction(s) for s in instance.items]
    return "\n".join(lines) + "\n"
