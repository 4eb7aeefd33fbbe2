"""Score-weighted program store for the evolutionary loop."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..common import SplitMix64
from .dsl import DslProgram


@dataclass(frozen=True)
class DbEntry:
    program: DslProgram
    score: float
    index: int  # creation order


class ProgramDatabase:
    """Entries sampled with probability proportional to exp(score / temperature).

    Higher scores are strictly more likely parents at any fixed temperature;
    lower temperatures sharpen the preference. Scores must be finite so the
    distribution stays proper.
    """

    def __init__(self, temperature: float = 1.0):
        if not temperature > 0:
            raise ValueError("temperature must be positive")
        self.temperature = float(temperature)
        self._entries: list[DbEntry] = []

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> tuple[DbEntry, ...]:
        return tuple(self._entries)

    def add(self, program: DslProgram, score: float) -> DbEntry:
        score = float(score)
        if not math.isfinite(score):
            raise ValueError("database scores must be finite")
        entry = DbEntry(program=program, score=score, index=len(self._entries))
        self._entries.append(entry)
        return entry

    def probabilities(self) -> tuple[float, ...]:
        if not self._entries:
            raise ValueError("empty database")
        peak = max(entry.score for entry in self._entries)
        weights = [
            math.exp((entry.score - peak) / self.temperature)
            for entry in self._entries
        ]
        total = sum(weights)
        return tuple(w / total for w in weights)

    def sample(self, rng: SplitMix64) -> DbEntry:
        draw = rng.uniform()
        cumulative = 0.0
        for entry, p in zip(self._entries, self.probabilities()):
            cumulative += p
            if draw < cumulative:
                return entry
        return self._entries[-1]  # cumulative fell short of 1 by float dust


    def best(self) -> DbEntry:
        if not self._entries:
            raise ValueError("empty database")
        return max(self._entries, key=lambda entry: (entry.score, -entry.index))
