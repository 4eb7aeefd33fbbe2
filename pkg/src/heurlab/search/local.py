"""Annealed random local search over box-bounded vector encodings."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

from ..common import SplitMix64


@dataclass(frozen=True)
class SearchProblem:
    """A box-bounded vector encoding of an adversarial-instance space.

    `decode` turns any in-bounds vector into a problem instance; it must be
    total there. `score` is the adversary's objective: higher means worse
    for the heuristic under attack, and ratio-type scores are at least 1.
    `clip_length` and `from_literal` serve the program-search loop, whose
    candidates are instance literals rather than vectors. `noise_scale` is
    the problem-specific default for the local-search variance parameter.
    """

    name: str
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    decode: Callable[[tuple[float, ...]], object]
    score: Callable[[object], float]
    clip_length: int
    from_literal: Callable[[object], object]
    noise_scale: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(x) for x in self.lower))
        object.__setattr__(self, "upper", tuple(float(x) for x in self.upper))
        if not self.lower or len(self.lower) != len(self.upper):
            raise ValueError("bounds must be non-empty and equally long")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("every lower bound must lie below its upper bound")
        if self.clip_length < 1:
            raise ValueError("clip_length must be positive")
        if self.noise_scale <= 0:
            raise ValueError("noise_scale must be positive")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def score_vector(self, vector: tuple[float, ...]) -> float:
        return self.score(self.decode(vector))


@dataclass(frozen=True)
class LocalSearchConfig:
    """Exactly one of `budget` (iterations) or `wall_clock` (seconds) is set."""

    s: float
    budget: int | None = None
    wall_clock: float | None = None
    accept_probability: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError("noise variance scale s must be positive")
        if (self.budget is None) == (self.wall_clock is None):
            raise ValueError("set exactly one of budget or wall_clock")
        if self.budget is not None and self.budget < 1:
            raise ValueError("iteration budget must be positive")
        if self.wall_clock is not None and self.wall_clock <= 0:
            raise ValueError("wall_clock must be positive")
        if not 0 < self.accept_probability <= 1:
            raise ValueError("accept_probability must be in (0, 1]")


@dataclass(frozen=True)
class LocalSearchResult:
    best_vector: tuple[float, ...]
    best_score: float
    trace: tuple[float, ...]  # best-so-far after the start point and each step


def local_search(problem: SearchProblem, config: LocalSearchConfig) -> LocalSearchResult:
    """Hill climbing with per-coordinate Gaussian noise that anneals to zero.

    The start point is uniform in the box. Each step perturbs every
    coordinate with N(0, s * (1 - t)) noise, t the consumed fraction of
    whichever budget is active, and clips back into the box. A candidate
    that improves on the current point is accepted with probability
    `accept_probability`; the returned best is over every vector scored,
    accepted or not, so the trace never decreases.
    """
    rng = SplitMix64(config.seed)
    lower, upper = problem.lower, problem.upper
    current = tuple(
        lo + rng.uniform() * (hi - lo) for lo, hi in zip(lower, upper)
    )
    current_score = problem.score_vector(current)
    best, best_score = current, current_score
    trace = [best_score]
    started = time.monotonic()
    step = 0
    while True:
        if config.budget is not None:
            if step >= config.budget:
                break
            fraction = step / config.budget
        else:
            elapsed = time.monotonic() - started
            if elapsed >= config.wall_clock:
                break
            fraction = elapsed / config.wall_clock
        sigma = math.sqrt(config.s * (1.0 - fraction))
        candidate = tuple(
            min(max(x + rng.gauss() * sigma, lo), hi)
            for x, lo, hi in zip(current, lower, upper)
        )
        candidate_score = problem.score_vector(candidate)
        if candidate_score > best_score:
            best, best_score = candidate, candidate_score
        if candidate_score > current_score and rng.uniform() < config.accept_probability:
            current, current_score = candidate, candidate_score
        trace.append(best_score)
        step += 1
    return LocalSearchResult(
        best_vector=best, best_score=best_score, trace=tuple(trace)
    )
