"""Shared plumbing: errors, exact-rational text round-trips, deterministic RNG."""

from __future__ import annotations

import math
from fractions import Fraction


class BudgetExceededError(Exception):
    """An exact computation ran past its configured node/time/size budget.

    `incumbent` optionally carries the best value found before the cutoff
    (an upper bound for minimization searches).
    """

    def __init__(self, message: str, incumbent=None):
        super().__init__(message)
        self.incumbent = incumbent


class InstanceParseError(ValueError):
    """An instance file (or DSL text) could not be parsed."""


class ProviderError(Exception):
    """An LLM provider failed (unreachable, bad payload) after retries.

    Carries whatever partial state the caller wants preserved in `partial`.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


def parse_fraction(text: str) -> Fraction:
    """Parse 'p/q', an integer, or a decimal string into an exact Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceParseError(f"not a rational number: {text!r}") from exc


def format_fraction(value: Fraction) -> str:
    """Canonical text for a rational: 'p/q' in lowest terms, or bare integer."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """splitmix64 finalizer; the usual xor-shift-multiply avalanche."""
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Tiny explicit 64-bit generator so results are identical on every platform.

    The stream for (seed, stream) pairs is independent enough for Monte-Carlo
    trial derivation: trial i uses SplitMix64(seed, stream=i) so a parallel
    and a serial run see the same shuffles.
    """

    def __init__(self, seed: int, stream: int = 0):
        self._state = _mix64((seed & _MASK64) ^ _mix64(stream + 1))

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, unbiased given unbiased below()."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def gauss(self) -> float:
        """Standard normal via Box-Muller (no cached second value)."""
        u1 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
