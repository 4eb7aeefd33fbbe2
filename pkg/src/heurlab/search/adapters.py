"""Problem adapters: vector encodings and literal decoders for the searches.

Each factory pins one encoding: box bounds, how a vector or a program
literal becomes an instance, the adversary's score, and the default noise
scale for annealed local search.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ..binpack import BinPackingInstance, random_order_score
from ..cluster import ClusterInstance, WeightedPoint, price_of_hierarchy
from ..common import BudgetExceededError
from ..gasoline import GasolineInstance, iterative_rounding, optimal_value
from ..knapsack import KnapsackInstance, knapsack_score
from .local import SearchProblem


def _number(value, what: str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    raise ValueError(f"{what} must be a number, got {type(value).__name__}")


def knapsack_problem(n_items: int = 20) -> SearchProblem:
    """Items as flat (weight, profit) coordinates; score is the Pareto blow-up
    max |P_i| / |P_final| of the staged Pareto sweep.

    Weights and profits are rounded to integers before evaluation, which is
    why the default noise scale is as large as 1000: smaller steps would
    vanish in the rounding.
    """
    if n_items < 1:
        raise ValueError("need at least one item")
    dim = 2 * n_items

    def decode(vector: tuple[float, ...]) -> KnapsackInstance:
        items = tuple(
            (max(1, round(vector[2 * i])), max(1, round(vector[2 * i + 1])))
            for i in range(n_items)
        )
        return KnapsackInstance(items)

    def from_literal(value) -> KnapsackInstance:
        if not isinstance(value, list) or not value:
            raise ValueError("expected a non-empty list of (weight, profit) pairs")
        items = []
        for entry in value:
            if not isinstance(entry, tuple) or len(entry) != 2:
                raise ValueError("each item must be a (weight, profit) pair")
            items.append((_number(entry[0], "weight"), _number(entry[1], "profit")))
        return KnapsackInstance(tuple(items))

    return SearchProblem(
        name="knapsack",
        lower=(1.0,) * dim,
        upper=(10_000.0,) * dim,
        decode=decode,
        score=lambda instance: float(knapsack_score(instance)),
        clip_length=n_items,
        from_literal=from_literal,
        noise_scale=1000.0,
    )


def binpack_problem(
    n_items: int = 13, trials: int = 10_000, seed: int = 0
) -> SearchProblem:
    """Item sizes in (0, 1] against capacity 1; the score shuffles the
    instance `trials` times and reports mean Best-Fit bins over optimum.

    The vector decode snaps sizes to the 1/1000 grid, matching the three
    decimals instances are usually reported with. Literals keep their exact
    values, so a structured program like repeat(6, 1/6) scores the
    construction itself rather than a rounding of it. The trial count and
    seed are fixed per problem, making scores reproducible.
    """
    if n_items < 1:
        raise ValueError("need at least one item")

    def decode(vector: tuple[float, ...]) -> BinPackingInstance:
        items = tuple(
            Fraction(min(1000, max(1, round(x * 1000))), 1000) for x in vector
        )
        return BinPackingInstance(capacity=Fraction(1), items=items)

    def from_literal(value) -> BinPackingInstance:
        if not isinstance(value, list) or not value:
            raise ValueError("expected a non-empty list of sizes")
        items = []
        for entry in value:
            size = _number(entry, "size")
            if not 0 < size <= 1:
                raise ValueError(f"size {size} outside (0, 1]")
            items.append(size)
        return BinPackingInstance(capacity=Fraction(1), items=tuple(items))

    return SearchProblem(
        name="binpack",
        lower=(0.0,) * n_items,
        upper=(1.0,) * n_items,
        decode=decode,
        score=lambda instance: random_order_score(instance, trials, seed).score,
        clip_length=n_items,
        from_literal=from_literal,
        noise_scale=0.2,
    )


def clustering_problem(n_points: int = 8, dimension: int = 2) -> SearchProblem:
    """Points as (coordinates..., weight exponent) blocks; score is the price
    of hierarchy under the two-part clustering cost.

    Worst-case instances like weights spanning orders of magnitude, so the
    vector carries an exponent and decode maps w to 2**w. Literals state
    weights directly and must keep them positive.
    """
    if n_points < 2:
        raise ValueError("need at least two points")
    if dimension < 1:
        raise ValueError("dimension must be positive")
    span = dimension + 1

    def decode(vector: tuple[float, ...]) -> ClusterInstance:
        points = []
        for i in range(n_points):
            block = vector[i * span : (i + 1) * span]
            points.append(
                WeightedPoint(
                    weight=Fraction.from_float(2.0 ** block[dimension]),
                    coords=tuple(block[:dimension]),
                )
            )
        return ClusterInstance(tuple(points))

    def from_literal(value) -> ClusterInstance:
        if not isinstance(value, list) or not value:
            raise ValueError("expected a non-empty list of point tuples")
        points = []
        for entry in value:
            if not isinstance(entry, tuple) or len(entry) != span:
                raise ValueError(
                    f"each point must be a tuple of {dimension} coordinates "
                    "followed by a weight"
                )
            weight = _number(entry[dimension], "weight")
            if weight <= 0:
                raise ValueError("weights must be positive")
            coords = tuple(float(_number(c, "coordinate")) for c in entry[:dimension])
            points.append(WeightedPoint(weight=weight, coords=coords))
        return ClusterInstance(tuple(points))

    bounds_low = ((-4.0,) * dimension + (-12.0,)) * n_points
    bounds_high = ((4.0,) * dimension + (12.0,)) * n_points
    return SearchProblem(
        name="clustering",
        lower=bounds_low,
        upper=bounds_high,
        decode=decode,
        score=price_of_hierarchy,
        clip_length=n_points,
        from_literal=from_literal,
        noise_scale=0.2,
    )


def gasoline_problem(n_pairs: int = 14, opt_budget: float = 10.0) -> SearchProblem:
    """Two-dimensional instances as n X-vectors then n Y-vectors, flattened.

    Decoding rounds entries to non-negative integers and repairs Y so both
    coordinate totals match X, adjusting the last vector and walking
    backwards when that alone would go negative. The score is the rounding
    value over the exact optimum; if the optimum search exhausts its budget
    the best incumbent stands in, floored by the rounding value itself, so
    the ratio is only ever understated.
    """
    if n_pairs < 1:
        raise ValueError("need at least one vector pair")
    d = 2

    def _repair(xs: list[list[int]], ys: list[list[int]]) -> None:
        for j in range(d):
            target = sum(x[j] for x in xs)
            residue = target - sum(y[j] for y in ys[:-1])
            index = len(ys) - 2
            while residue < 0 and index >= 0:
                take = min(ys[index][j], -residue)
                ys[index][j] -= take
                residue += take
                index -= 1
            ys[-1][j] = residue

    def _build(xs: list[list[int]], ys: list[list[int]]) -> GasolineInstance:
        _repair(xs, ys)
        return GasolineInstance(tuple(map(tuple, xs)), tuple(map(tuple, ys)))

    def decode(vector: tuple[float, ...]) -> GasolineInstance:
        flat = [max(0, round(v)) for v in vector]
        xs = [flat[2 * i : 2 * i + 2] for i in range(n_pairs)]
        ys = [
            flat[2 * n_pairs + 2 * i : 2 * n_pairs + 2 * i + 2]
            for i in range(n_pairs)
        ]
        return _build(xs, ys)

    def from_literal(value) -> GasolineInstance:
        if not isinstance(value, tuple) or len(value) != 2:
            raise ValueError("expected a pair (x-vectors, y-vectors)")
        sides = []
        for side in value:
            if not isinstance(side, list) or not side:
                raise ValueError("each side must be a non-empty list of pairs")
            vectors = []
            for entry in side:
                if not isinstance(entry, tuple) or len(entry) != d:
                    raise ValueError(f"vectors must be {d}-tuples")
                vectors.append(
                    [max(0, round(_number(c, "entry"))) for c in entry]
                )
            sides.append(vectors)
        xs, ys = sides
        if len(xs) != len(ys):
            raise ValueError("both sides must have the same length")
        return _build(xs, ys)

    def score(instance: GasolineInstance) -> float:
        rounded = iterative_rounding(instance).value
        try:
            opt = optimal_value(instance, budget=opt_budget)
        except BudgetExceededError as exc:
            opt = min(int(exc.incumbent), rounded)
        if opt == 0:
            return 1.0 if rounded == 0 else math.inf
        return rounded / opt

    dim = n_pairs * d * 2
    return SearchProblem(
        name="gasoline",
        lower=(0.0,) * dim,
        upper=(32.0,) * dim,
        decode=decode,
        score=score,
        clip_length=n_pairs,
        from_literal=from_literal,
        noise_scale=0.2,
    )
