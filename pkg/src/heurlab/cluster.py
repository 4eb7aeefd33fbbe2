"""Weighted k-median clustering under L1 and the price of hierarchy.

Costs are two-part values: the contribution of symbolically infinite-weight
points is tracked separately from the finite part and compared first, so the
heavy-point device never needs a big-M constant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence

from .common import BudgetExceededError, InstanceParseError, format_fraction, parse_fraction

OPTIMAL_CLUSTERING_MAX_POINTS = 12
HIERARCHY_SEARCH_MAX_POINTS = 10


class InfiniteWeight:
    """Symbolic infinite point weight; a singleton, compares by identity."""

    _instance: "InfiniteWeight | None" = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Infinite"


INFINITE = InfiniteWeight()


@dataclass(frozen=True)
class WeightedPoint:
    weight: Fraction | InfiniteWeight
    coords: tuple[float, ...]

    def __post_init__(self):
        if not isinstance(self.weight, InfiniteWeight):
            object.__setattr__(self, "weight", Fraction(self.weight))
            if self.weight <= 0:
                raise ValueError("finite weight must be positive")
        object.__setattr__(self, "coords", tuple(float(x) for x in self.coords))
        if not self.coords or not all(math.isfinite(x) for x in self.coords):
            raise ValueError("coordinates must be finite and non-empty")

    @property
    def is_infinite(self) -> bool:
        return isinstance(self.weight, InfiniteWeight)


@dataclass(frozen=True)
class ClusterInstance:
    points: tuple[WeightedPoint, ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("instance needs at least one point")
        d = len(self.points[0].coords)
        if any(len(p.coords) != d for p in self.points):
            raise ValueError("all points must share one dimension")

    @property
    def dimension(self) -> int:
        return len(self.points[0].coords)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MergeSequence:
    """Merges on cluster ids: singleton i has id i, merge j creates id n+j."""

    merges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "merges", tuple((int(a), int(b)) for a, b in self.merges)
        )


@total_ordering
@dataclass(frozen=True)
class TwoPartCost:
    infinite_part: float
    finite_part: float

    def __post_init__(self):
        if self.infinite_part < 0 or self.finite_part < 0:
            raise ValueError("cost parts must be non-negative")

    def __add__(self, other: "TwoPartCost") -> "TwoPartCost":
        return TwoPartCost(
            self.infinite_part + other.infinite_part,
            self.finite_part + other.finite_part,
        )

    def __lt__(self, other: "TwoPartCost") -> bool:
        return (self.infinite_part, self.finite_part) < (
            other.infinite_part,
            other.finite_part,
        )

    @property
    def is_finite(self) -> bool:
        return self.infinite_part == 0

    @classmethod
    def zero(cls) -> "TwoPartCost":
        return cls(0.0, 0.0)


ZERO_COST = TwoPartCost.zero()


def l1_distance(a: Sequence[float], b: Sequence[float]) -> float:
    return sum(abs(x - y) for x, y in zip(a, b))


def cost_ratio(hierarchy_cost: TwoPartCost, optimal_cost: TwoPartCost) -> float:
    """Ratio of two costs in the weight-to-infinity limit.

    Infinite parts dominate: if the optimum has one, only infinite parts
    matter; a hierarchy-only infinite part means the ratio diverges. Zero
    over zero is 1 so all-singleton levels never dominate the maximum.
    """
    if optimal_cost.infinite_part > 0:
        return hierarchy_cost.infinite_part / optimal_cost.infinite_part
    if hierarchy_cost.infinite_part > 0:
        return math.inf
    if optimal_cost.finite_part == 0:
        return 1.0 if hierarchy_cost.finite_part == 0 else math.inf
    return hierarchy_cost.finite_part / optimal_cost.finite_part


def cluster_cost(points: Iterable[WeightedPoint]) -> TwoPartCost:
    """Cheapest way to serve a cluster from one of its own members."""
    members = list(points)
    if not members:
        raise ValueError("cluster must be non-empty")
    best: TwoPartCost | None = None
    for center in members:
        inf_part = 0.0
        fin_part = 0.0
        for q in members:
            dist = l1_distance(q.coords, center.coords)
            if q.is_infinite:
                inf_part += dist
            else:
                fin_part += float(q.weight) * dist
        cand = TwoPartCost(inf_part, fin_part)
        if best is None or cand < best:
            best = cand
    return best


def optimal_k_clustering(
    instance: ClusterInstance,
    k: int,
    budget: int = OPTIMAL_CLUSTERING_MAX_POINTS,
) -> tuple[TwoPartCost, tuple[frozenset[int], ...]]:
    """Exact optimum over all k-subsets of points taken as centers.

    Every optimal clustering serves each cluster from a member, so ranging
    over member subsets and nearest-center assignment reaches the optimum.
    Returned cost re-minimizes the center inside each induced group, which
    can only match or improve the assignment cost at the winning subset.
    """
    n = len(instance)
    if n > budget:
        raise BudgetExceededError(f"optimal clustering capped at {budget} points, got {n}")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    pts = instance.points
    best_assign: TwoPartCost | None = None
    best_groups: tuple[frozenset[int], ...] | None = None
    for centers in itertools.combinations(range(n), k):
        total = ZERO_COST
        groups: dict[int, list[int]] = {c: [] for c in centers}
        for i, q in enumerate(pts):
            cheapest: TwoPartCost | None = None
            home = centers[0]
            for c in centers:
                dist = l1_distance(q.coords, pts[c].coords)
                contrib = (
                    TwoPartCost(dist, 0.0)
                    if q.is_infinite
                    else TwoPartCost(0.0, float(q.weight) * dist)
                )
                if cheapest is None or contrib < cheapest:
                    cheapest, home = contrib, c
            groups[home].append(i)
            total = total + cheapest
        if best_assign is None or total < best_assign:
            best_assign = total
            best_groups = tuple(
                frozenset(members) for members in groups.values() if members
            )
    partition = tuple(sorted(best_groups, key=min))
    cost = ZERO_COST
    for group in partition:
        cost = cost + cluster_cost(pts[i] for i in group)
    return cost, partition


def hierarchy_levels(
    instance: ClusterInstance, merge_sequence: MergeSequence
) -> list[tuple[frozenset[int], ...]]:
    """Expand a merge sequence into clusterings H_n, H_{n-1}, …, H_1."""
    n = len(instance)
    if len(merge_sequence.merges) != n - 1:
        raise ValueError(f"need exactly {n - 1} merges for {n} points")
    live: dict[int, frozenset[int]] = {i: frozenset([i]) for i in range(n)}
    levels = [tuple(sorted(live.values(), key=min))]
    for step, (a, b) in enumerate(merge_sequence.merges):
        if a == b or a not in live or b not in live:
            raise ValueError(f"merge {step} references unavailable clusters ({a}, {b})")
        merged = live.pop(a) | live.pop(b)
        live[n + step] = merged
        levels.append(tuple(sorted(live.values(), key=min)))
    return levels


def _level_cost(
    clustering: tuple[frozenset[int], ...],
    pts: Sequence[WeightedPoint],
    cache: dict[frozenset[int], TwoPartCost],
) -> TwoPartCost:
    total = ZERO_COST
    for group in clustering:
        got = cache.get(group)
        if got is None:
            got = cluster_cost(pts[i] for i in group)
            cache[group] = got
        total = total + got
    return total


def hierarchy_ratio(
    instance: ClusterInstance,
    merge_sequence: MergeSequence,
    budget: int = OPTIMAL_CLUSTERING_MAX_POINTS,
) -> float:
    """Worst level-wise ratio of the hierarchy's cost to the exact optimum."""
    levels = hierarchy_levels(instance, merge_sequence)
    cache: dict[frozenset[int], TwoPartCost] = {}
    worst = 1.0
    for clustering in levels:
        k = len(clustering)
        opt_cost, _ = optimal_k_clustering(instance, k, budget=budget)
        ratio = cost_ratio(_level_cost(clustering, instance.points, cache), opt_cost)
        worst = max(worst, ratio)
    return worst


def price_of_hierarchy(
    instance: ClusterInstance,
    budget: int = HIERARCHY_SEARCH_MAX_POINTS,
    prune: bool = True,
) -> float:
    """Best achievable hierarchy ratio, by search over merge sequences.

    Enumerates every unordered pair of live clusters at each level. With
    `prune` a partial sequence is dropped as soon as its running maximum
    reaches the incumbent; the optimum is unaffected because extending a
    sequence never lowers its maximum.
    """
    n = len(instance)
    if n > budget:
        raise BudgetExceededError(f"hierarchy search capped at {budget} points, got {n}")
    pts = instance.points
    opt_cost = {
        k: optimal_k_clustering(instance, k)[0] for k in range(1, n + 1)
    }
    cost_cache: dict[frozenset[int], TwoPartCost] = {}
    ratio_cache: dict[tuple[frozenset[int], ...], float] = {}

    def level_ratio(clustering: tuple[frozenset[int], ...]) -> float:
        got = ratio_cache.get(clustering)
        if got is None:
            got = cost_ratio(
                _level_cost(clustering, pts, cost_cache), opt_cost[len(clustering)]
            )
            ratio_cache[clustering] = got
        return got

    incumbent = math.inf
    singletons = tuple(frozenset([i]) for i in range(n))

    def search(clustering: tuple[frozenset[int], ...], running_max: float) -> None:
        nonlocal incumbent
        if len(clustering) == 1:
            incumbent = min(incumbent, running_max)
            return
        for i, j in itertools.combinations(range(len(clustering)), 2):
            merged = clustering[i] | clustering[j]
            child = tuple(
                sorted(
                    [c for idx, c in enumerate(clustering) if idx not in (i, j)]
                    + [merged],
                    key=min,
                )
            )
            new_max = max(running_max, level_ratio(child))
            if prune and new_max >= incumbent:
                continue
            search(child, new_max)

    search(singletons, level_ratio(singletons))
    return incumbent


def c_value(d: int) -> float:
    """Displacement of the axis points; the positive root of c² − c(d−3) − d²."""
    if d < 4:
        raise ValueError(f"construction needs d >= 4, got {d}")
    return (math.sqrt(4 * d * d + (3 - d) ** 2) + d - 3) / 2


def gen_theorem_instance(d: int) -> ClusterInstance:
    """The (d+2)-point lower-bound instance for the price of hierarchy.

    One all-ones point with infinite weight, the origin, and -c·e_i on each
    axis, with c chosen so that merging the two heavy-side points early or
    late both cost a factor c/d somewhere in the hierarchy.
    """
    c = c_value(d)
    if not c > d:
        raise AssertionError("construction requires c > d")
    points = [
        WeightedPoint(INFINITE, (1.0,) * d),
        WeightedPoint(Fraction(1), (0.0,) * d),
    ]
    for i in range(d):
        coords = [0.0] * d
        coords[i] = -c
        points.append(WeightedPoint(Fraction(1), tuple(coords)))
    return ClusterInstance(points=tuple(points))


# ---------------------------------------------------------------------------
# Serialization: one point per line, `weight coord1 ... coordd`.


def parse_cluster(text: str) -> ClusterInstance:
    points = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise InstanceParseError(f"line {lineno}: expected weight and coordinates")
        if tokens[0].lower() == "inf":
            weight: Fraction | InfiniteWeight = INFINITE
        else:
            weight = parse_fraction(tokens[0])
        try:
            coords = tuple(float(t) for t in tokens[1:])
        except ValueError as exc:
            raise InstanceParseError(f"line {lineno}: bad coordinate: {exc}") from exc
        try:
            points.append(WeightedPoint(weight, coords))
        except ValueError as exc:
            raise InstanceParseError(f"line {lineno}: {exc}") from exc
    if not points:
        raise InstanceParseError("no points found")
    try:
        return ClusterInstance(points=tuple(points))
    except ValueError as exc:
        raise InstanceParseError(str(exc)) from exc


def render_cluster(instance: ClusterInstance) -> str:
    lines = []
    for p in instance.points:
        w = "inf" if p.is_infinite else format_fraction(p.weight)
        lines.append(" ".join([w] + [repr(x) for x in p.coords]))
    return "\n".join(lines) + "\n"
