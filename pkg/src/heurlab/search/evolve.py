"""The evolutionary program-search loop with a pluggable reply source."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..common import ProviderError, SplitMix64
from .database import ProgramDatabase
from .dsl import DslEvalError, DslParseError, DslProgram, dsl_eval
from .local import SearchProblem
from .providers import Provider


def build_prompt(problem_name: str, parent_source: str) -> str:
    """The improvement request. The scoring function is deliberately absent."""
    return (
        f"You write instance generators for the {problem_name} problem in a "
        "small expression language.\n"
        "Allowed: numbers, the operators + - * / and integer **, tuples "
        "(a, b), lists [a, b], repeat(count, expr), concat(lists...), and "
        "mapr(i, start, stop, body) for inclusive ranges.\n"
        "Current generator:\n"
        f"{parent_source}\n"
        "Reply with a single improved expression in the same language and "
        "nothing else."
    )


@dataclass(frozen=True)
class EvolveLogRecord:
    iteration: int
    parent_index: int
    status: str  # ok | malformed | eval_error | provider_error
    score: float | None


@dataclass(frozen=True)
class EvolveResult:
    best_program: DslProgram
    best_score: float
    database: ProgramDatabase
    log: tuple[EvolveLogRecord, ...]
    skipped: int


def _strip_fences(reply: str) -> str:
    text = reply.strip()
    if text.startswith("```"):
        lines = text.splitlines()[1:]
        if lines and lines[-1].strip().startswith("```"):
            lines = lines[:-1]
        text = "\n".join(lines).strip()
    return text


def evolve(
    problem: SearchProblem,
    provider: Provider,
    database: ProgramDatabase,
    budget: int,
    seed: int = 0,
) -> EvolveResult:
    """Run `budget` mutation rounds and return the best program seen.

    Each round samples a parent by the database's score-weighted
    distribution, asks the provider for an improved program, and scores the
    reply through the problem's literal decoder. Replies that fail to
    parse, evaluate, decode or score are counted as skipped and leave the
    database untouched, so best-so-far never decreases. A provider failure
    raises ProviderError with the partial EvolveResult attached.
    """
    if len(database) == 0:
        raise ValueError("seed the database with at least one scored program")
    if budget < 0:
        raise ValueError("budget must be non-negative")
    rng = SplitMix64(seed)
    log: list[EvolveLogRecord] = []
    skipped = 0

    def result() -> EvolveResult:
        best = database.best()
        return EvolveResult(
            best_program=best.program,
            best_score=best.score,
            database=database,
            log=tuple(log),
            skipped=skipped,
        )

    for iteration in range(budget):
        parent = database.sample(rng)
        prompt = build_prompt(problem.name, parent.program.source)
        try:
            reply = provider.complete(prompt)
        except ProviderError as exc:
            log.append(
                EvolveLogRecord(iteration, parent.index, "provider_error", None)
            )
            raise ProviderError(str(exc), partial=result()) from exc
        try:
            program = DslProgram(_strip_fences(reply))
        except DslParseError:
            skipped += 1
            log.append(EvolveLogRecord(iteration, parent.index, "malformed", None))
            continue
        try:
            literal = dsl_eval(program, problem.clip_length)
            instance = problem.from_literal(literal)
            score = float(problem.score(instance))
            if not math.isfinite(score):
                raise DslEvalError("score is not finite")
        except (DslEvalError, ValueError, TypeError):
            skipped += 1
            log.append(EvolveLogRecord(iteration, parent.index, "eval_error", None))
            continue
        database.add(program, score)
        log.append(EvolveLogRecord(iteration, parent.index, "ok", score))
    return result()
