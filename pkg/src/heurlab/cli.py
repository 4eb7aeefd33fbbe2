"""Command-line surface: score, generate, search, reproduce.

Every command produces a RunRecord; with --log the record is appended to a
line-delimited JSON file under an exclusive lock, so runs can be replayed
from their recorded flags and seed. Exit codes are distinct per failure
class: 0 success, 2 configuration or parameter errors, 3 instance parse
errors, 4 exhausted budgets, 5 provider failures.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
import uuid
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from . import __version__
from .binpack import (
    BinPackingInstance,
    gen_coprime_construction,
    parse_binpack,
    random_order_score,
    render_binpack,
)
from .cluster import (
    gen_theorem_instance,
    parse_cluster,
    price_of_hierarchy,
    render_cluster,
)
from .common import (
    BudgetExceededError,
    InstanceParseError,
    ProviderError,
    format_fraction,
)
from .gasoline import (
    gen_extension,
    iterative_rounding,
    optimal_value,
    parse_gasoline,
    render_gasoline,
    table3_row,
)
from .knapsack import (
    gen_instance_I1,
    gen_instance_I2,
    nu_pareto_sweep,
    parse_knapsack,
    render_knapsack,
)
from .search import (
    DslProgram,
    HttpProvider,
    LocalSearchConfig,
    MockProvider,
    ProgramDatabase,
    ProviderConfig,
    binpack_problem,
    clustering_problem,
    dsl_eval,
    evolve,
    gasoline_problem,
    knapsack_problem,
    local_search,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_BUDGET = 4
EXIT_PROVIDER = 5

PROBLEMS = ("knapsack", "binpack", "cluster", "gasoline")

PARSERS = {
    "knapsack": parse_knapsack,
    "binpack": parse_binpack,
    "cluster": parse_cluster,
    "gasoline": parse_gasoline,
}
RENDERERS = {
    "knapsack": render_knapsack,
    "binpack": render_binpack,
    "cluster": render_cluster,
    "gasoline": render_gasoline,
}

# Trivial but valid starting generators for the evolve loop, one per problem.
SEED_PROGRAMS = {
    "knapsack": "repeat(20, (1, 1))",
    "binpack": "repeat(13, 1/2)",
    "cluster": "mapr(i, 1, 8, (i, 0, 1))",
    "gasoline": "(repeat(14, (1, 1)), repeat(14, (1, 1)))",
}


class CliError(Exception):
    """Configuration or usage problem; maps to EXIT_CONFIG."""


# ---------------------------------------------------------------------------
# Run records


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    command: str
    flags: dict
    seed: int | None
    problem: str | None
    fingerprint: str | None
    scores: dict
    duration: float
    version: str

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "command": self.command,
            "flags": _jsonable(self.flags),
            "seed": self.seed,
            "problem": self.problem,
            "fingerprint": self.fingerprint,
            "scores": _jsonable(self.scores),
            "duration": self.duration,
            "version": self.version,
        }


def _jsonable(value):
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)


def _fingerprint(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _append_log(path: str | None, record: RunRecord) -> None:
    if path is None:
        return
    line = json.dumps(record.to_dict(), sort_keys=True)
    with open(path, "a", encoding="utf-8") as handle:
        try:
            import fcntl

            fcntl.flock(handle, fcntl.LOCK_EX)
        except ImportError:
            pass
        handle.write(line + "\n")
        handle.flush()


def _flags_of(args: argparse.Namespace) -> dict:
    skip = {"func", "command", "log", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, record: RunRecord, table: list[dict] | None = None) -> int:
    """Print the record in the requested format and append it to the log."""
    _append_log(args.log, record)
    if args.format == "json":
        print(json.dumps(record.to_dict(), sort_keys=True))
    elif args.format == "csv":
        _emit_csv(record, table)
    else:
        _emit_text(record, table)
    return EXIT_OK


def _emit_text(record: RunRecord, table: list[dict] | None) -> None:
    print(f"command: {record.command}")
    if record.problem:
        print(f"problem: {record.problem}")
    if record.fingerprint:
        print(f"fingerprint: {record.fingerprint}")
    for key, value in record.scores.items():
        if table is not None and key == "rows":
            continue
        if isinstance(value, (list, tuple)):
            print(f"{key}: {len(value)} entries")
        else:
            print(f"{key}: {_jsonable(value)}")
    if table is not None:
        print(_format_table(table))
    print(f"duration: {record.duration:.3f}s")


def _emit_csv(record: RunRecord, table: list[dict] | None) -> None:
    out = io.StringIO()
    writer = csv.writer(out)
    if table is not None:
        writer.writerow(table[0].keys())
        for row in table:
            writer.writerow(_jsonable(v) for v in row.values())
    else:
        scalars = {
            "run_id": record.run_id,
            "command": record.command,
            "problem": record.problem,
            "seed": record.seed,
            "fingerprint": record.fingerprint,
            "duration": record.duration,
            "version": record.version,
        }
        for key, value in record.scores.items():
            if not isinstance(value, (list, tuple, dict)):
                scalars[key] = _jsonable(value)
        writer.writerow(scalars.keys())
        writer.writerow(scalars.values())
    sys.stdout.write(out.getvalue())


def _format_table(rows: list[dict]) -> str:
    headers = list(rows[0].keys())
    cells = [[str(_jsonable(row[h])) for h in headers] for row in rows]
    widths = [
        max(len(h), *(len(line[i]) for line in cells))
        for i, h in enumerate(headers)
    ]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for line in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(line, widths)))
    return "\n".join(lines)


def _record(args, problem, fingerprint, scores, started) -> RunRecord:
    return RunRecord(
        run_id=uuid.uuid4().hex,
        command=args.command,
        flags=_flags_of(args),
        seed=getattr(args, "seed", None),
        problem=problem,
        fingerprint=fingerprint,
        scores=scores,
        duration=time.monotonic() - started,
        version=__version__,
    )


def _reference() -> dict:
    data = resources.files("heurlab.data").joinpath("reference.json")
    return json.loads(data.read_text(encoding="utf-8"))


def _reference_bytes() -> bytes:
    return (
        resources.files("heurlab.data").joinpath("reference.json").read_bytes()
    )


def _matches_printed(value: Fraction | float, printed: str) -> bool:
    """Does `value` round to the decimal string a report table printed?"""
    decimals = len(printed.split(".")[1]) if "." in printed else 0
    return round(float(value), decimals) == float(printed)


# ---------------------------------------------------------------------------
# Instance sources


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _load_instance(problem: str, path: str):
    return PARSERS[problem](_read_file(path))


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise CliError(message)


def _knapsack_instance(args):
    if args.file:
        return _load_instance("knapsack", args.file)
    _require(
        args.n is not None and args.k is not None,
        "need --file or all of --family/--n/--k",
    )
    maker = gen_instance_I1 if args.family == "i1" else gen_instance_I2
    return maker(args.n, args.k)


def _binpack_instance(args):
    if args.file:
        return _load_instance("binpack", args.file)
    _require(args.m is not None, "need --file or --m")
    return gen_coprime_construction(args.m)


def _cluster_instance(args):
    if args.file:
        return _load_instance("cluster", args.file)
    _require(args.d is not None, "need --file or --d")
    return gen_theorem_instance(args.d)


def _gasoline_instance(args):
    if args.file:
        return _load_instance("gasoline", args.file)
    _require(
        args.d is not None and args.k is not None, "need --file or --d/--k"
    )
    return gen_extension(args.d, args.k)


# ---------------------------------------------------------------------------
# score


def cmd_score(args) -> int:
    started = time.monotonic()
    problem = args.problem
    if problem == "knapsack":
        instance = _knapsack_instance(args)
        sweep = nu_pareto_sweep(instance)
        score = Fraction(max(sweep.sizes), sweep.sizes[-1])
        scores = {
            "score": float(score),
            "score_exact": format_fraction(score),
            "max_size": max(sweep.sizes),
            "final_size": sweep.sizes[-1],
        }
    elif problem == "binpack":
        instance = _binpack_instance(args)
        report = random_order_score(instance, args.trials, args.seed)
        scores = {
            "score": report.score,
            "mean_bins": float(report.mean_bins),
            "mean_bins_exact": format_fraction(report.mean_bins),
            "standard_error": report.standard_error,
            "opt_bins": report.opt_bins,
            "trials": report.trials,
        }
    elif problem == "cluster":
        instance = _cluster_instance(args)
        if args.budget is not None:
            scores = {"score": price_of_hierarchy(instance, budget=args.budget)}
        else:
            scores = {"score": price_of_hierarchy(instance)}
    else:
        instance = _gasoline_instance(args)
        trace = iterative_rounding(instance)
        opt = optimal_value(instance, budget=args.opt_budget)
        if opt > 0:
            ratio = Fraction(trace.value, opt)
            scores = {
                "score": float(ratio),
                "score_exact": format_fraction(ratio),
            }
        else:
            scores = {"score": 1.0 if trace.value == 0 else math.inf}
        scores.update({"ir_value": trace.value, "opt_value": opt})
    fingerprint = _fingerprint(RENDERERS[problem](instance))
    return _emit(args, _record(args, problem, fingerprint, scores, started))


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    started = time.monotonic()
    problem = args.problem
    if problem == "knapsack":
        _require(args.n is not None and args.k is not None, "need --n and --k")
        maker = gen_instance_I1 if args.family == "i1" else gen_instance_I2
        instance = maker(args.n, args.k)
    elif problem == "binpack":
        _require(args.m is not None, "need --m")
        capacity, sizes = gen_coprime_construction(args.m).scaled()
        instance = BinPackingInstance(capacity=capacity, items=tuple(sizes))
    elif problem == "cluster":
        _require(args.d is not None, "need --d")
        instance = gen_theorem_instance(args.d)
    else:
        _require(args.d is not None and args.k is not None, "need --d and --k")
        instance = gen_extension(args.d, args.k)

    text = RENDERERS[problem](instance)
    reparsed = PARSERS[problem](text)
    if RENDERERS[problem](reparsed) != text:
        raise RuntimeError("serializer failed to round-trip its own output")

    scores: dict = {"bytes": len(text.encode())}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        scores["path"] = args.out
    record = _record(args, problem, _fingerprint(text), scores, started)
    if args.out is None and args.format == "text":
        sys.stdout.write(text)
        _append_log(args.log, record)
        return EXIT_OK
    if args.out is None:
        scores["content"] = text
    return _emit(args, record)


# ---------------------------------------------------------------------------
# search


def _search_problem(args):
    if args.problem == "knapsack":
        return knapsack_problem(n_items=args.items or 20)
    if args.problem == "binpack":
        return binpack_problem(
            n_items=args.items or 13, trials=args.trials, seed=args.seed
        )
    if args.problem == "cluster":
        return clustering_problem(n_points=args.points)
    return gasoline_problem(n_pairs=args.pairs, opt_budget=args.opt_budget)


def _provider_of(args):
    if args.provider == "mock":
        _require(args.script is not None, "--provider mock needs --script")
        lines = _read_file(args.script).splitlines()
        return MockProvider(lines), len(lines)
    _require(
        args.endpoint is not None and args.model is not None,
        "--provider http needs --endpoint and --model",
    )
    config = ProviderConfig(endpoint=args.endpoint, model=args.model)
    _require(
        bool(os.environ.get(config.api_key_env)),
        f"set {config.api_key_env} to use the http provider",
    )
    return HttpProvider(config), None


def _evolve_scores(result) -> dict:
    return {
        "best_score": result.best_score,
        "best_program": result.best_program.source,
        "database_size": len(result.database),
        "skipped": result.skipped,
        "events": [
            {
                "iteration": rec.iteration,
                "parent_index": rec.parent_index,
                "status": rec.status,
                "score": rec.score,
            }
            for rec in result.log
        ],
    }


def cmd_search(args) -> int:
    started = time.monotonic()
    problem = _search_problem(args)

    if args.method == "local":
        budget = args.budget
        if budget is None and args.wall_clock is None:
            budget = 1000
        config = LocalSearchConfig(
            s=args.noise if args.noise is not None else problem.noise_scale,
            budget=budget,
            wall_clock=args.wall_clock,
            seed=args.seed,
        )
        result = local_search(problem, config)
        best_instance = problem.decode(result.best_vector)
        artifact = RENDERERS[args.problem](best_instance)
        scores = {
            "best_score": result.best_score,
            "steps": len(result.trace) - 1,
            "trace": list(result.trace),
        }
    else:
        provider, script_len = _provider_of(args)
        budget = args.budget if args.budget is not None else script_len or 30
        database = ProgramDatabase(temperature=args.temperature)
        seed_program = DslProgram(SEED_PROGRAMS[args.problem])
        seed_instance = problem.from_literal(
            dsl_eval(seed_program, problem.clip_length)
        )
        database.add(seed_program, problem.score(seed_instance))
        try:
            result = evolve(
                problem, provider, database, budget=budget, seed=args.seed
            )
        except ProviderError as exc:
            if exc.partial is not None:
                scores = _evolve_scores(exc.partial)
                scores["error"] = str(exc)
                record = _record(args, args.problem, None, scores, started)
                _append_log(args.log, record)
            print(f"provider failed: {exc}", file=sys.stderr)
            return EXIT_PROVIDER
        artifact = result.best_program.source + "\n"
        scores = _evolve_scores(result)

    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(artifact)
        scores["path"] = args.out
    record = _record(args, args.problem, _fingerprint(artifact), scores, started)
    return _emit(args, record)


# ---------------------------------------------------------------------------
# reproduce


def _reproduce_table3(args) -> tuple[list[dict], str]:
    block = _reference()["gasoline_table"]
    rows = []
    for ref in block["rows"]:
        if ref["d"] > args.max_d or ref["k"] > args.max_k:
            continue
        computed = table3_row(ref["d"], ref["k"], opt_budget=args.opt_budget)
        ok = computed.len_x == ref["len_x"] and computed.ir_value == ref["ir"]
        if computed.opt_within_budget:
            ok = (
                ok
                and computed.opt_value == ref["opt"]
                and _matches_printed(computed.ratio, ref["ratio"])
            )
            opt_cell: object = computed.opt_value
            ratio_cell: object = f"{float(computed.ratio):.4g}"
        else:
            opt_cell = "skipped (budget)"
            ratio_cell = "skipped (budget)"
        rows.append(
            {
                "d": ref["d"],
                "k": ref["k"],
                "len_x": computed.len_x,
                "ir": computed.ir_value,
                "ir_ref": ref["ir"],
                "opt": opt_cell,
                "opt_ref": ref["opt"],
                "ratio": ratio_cell,
                "ratio_ref": ref["ratio"],
                "match": "ok" if ok else "MISMATCH",
            }
        )
    return rows, block["source"]


def _reproduce_knapsack(args) -> tuple[list[dict], str]:
    block = _reference()["knapsack_counts"]
    rows = []
    for ref in block["rows"]:
        maker = gen_instance_I1 if ref["family"] == "i1" else gen_instance_I2
        sweep = nu_pareto_sweep(maker(ref["n"], ref["k"]))
        max_size, final_size = max(sweep.sizes), sweep.sizes[-1]
        ratio = Fraction(max_size, final_size)
        ok = (
            max_size == ref["max_size"]
            and final_size == ref["final_size"]
            and _matches_printed(ratio, ref["ratio"])
        )
        rows.append(
            {
                "family": ref["family"],
                "n": ref["n"],
                "k": ref["k"],
                "max_size": max_size,
                "max_size_ref": ref["max_size"],
                "final_size": final_size,
                "final_size_ref": ref["final_size"],
                "ratio": f"{float(ratio):.4g}",
                "ratio_ref": ref["ratio"],
                "match": "ok" if ok else "MISMATCH",
            }
        )
    return rows, block["source"]


def _reproduce_clustering(args) -> tuple[list[dict], str]:
    block = _reference()["clustering_bounds"]
    rows = []
    for ref in block["rows"]:
        if args.d is not None and ref["d"] != args.d:
            continue
        poh = price_of_hierarchy(gen_theorem_instance(ref["d"]))
        ok = poh >= ref["bound"] - 1e-9
        rows.append(
            {
                "d": ref["d"],
                "poh": f"{poh:.6f}",
                "bound": f"{ref['bound']:.6f}",
                "bound_formula": ref["bound_formula"],
                "match": "ok" if ok else "MISMATCH",
            }
        )
    _require(bool(rows), f"no reference bound for d={args.d}")
    return rows, block["source"]


def _reproduce_binpack(args) -> tuple[list[dict], str]:
    block = _reference()["binpack_interval"]
    report = random_order_score(
        gen_coprime_construction(args.m), args.trials, args.seed
    )
    if args.m == block["m"] and args.trials == block["trials"]:
        ok = block["low"] <= report.score <= block["high"]
        match = "ok" if ok else "MISMATCH"
    else:
        match = "no reference"
    rows = [
        {
            "m": args.m,
            "trials": args.trials,
            "score": f"{report.score:.4f}",
            "interval": f"[{block['low']}, {block['high']}]",
            "match": match,
        }
    ]
    return rows, block["source"]


def cmd_reproduce(args) -> int:
    started = time.monotonic()
    handler = {
        "table3": _reproduce_table3,
        "knapsack-ratios": _reproduce_knapsack,
        "clustering-poh": _reproduce_clustering,
        "binpack-ratio": _reproduce_binpack,
    }[args.target]
    rows, source = handler(args)
    matches = [row["match"] for row in rows]
    scores = {
        "source": source,
        "all_match": all(m == "ok" for m in matches),
        "rows": rows,
    }
    fingerprint = hashlib.sha256(_reference_bytes()).hexdigest()
    record = _record(args, None, fingerprint, scores, started)
    return _emit(args, record, table=rows)


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed")
    common.add_argument("--out", help="write the produced artifact here")
    common.add_argument("--log", help="append the run record to this JSONL file")
    common.add_argument(
        "--format", choices=("text", "json", "csv"), default="text"
    )

    parser = argparse.ArgumentParser(
        prog="heurlab",
        description="Adversarial-instance laboratory for four heuristics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser(
        "score", parents=[common], help="score one instance"
    )
    score.add_argument("problem", choices=PROBLEMS)
    score.add_argument("--file", help="instance file to score")
    score.add_argument("--family", choices=("i1", "i2"), default="i2")
    score.add_argument("--n", type=int)
    score.add_argument("--k", type=int)
    score.add_argument("--m", type=int)
    score.add_argument("--d", type=int)
    score.add_argument("--trials", type=int, default=10_000)
    score.add_argument("--budget", type=int, default=None,
                       help="point cap for the hierarchy search")
    score.add_argument("--opt-budget", "--opt-budget-seconds",
                       dest="opt_budget", type=float, default=600.0)
    score.set_defaults(func=cmd_score)

    generate = sub.add_parser(
        "generate", parents=[common], help="write a construction to a file"
    )
    generate.add_argument("problem", choices=PROBLEMS)
    generate.add_argument("--family", choices=("i1", "i2"), default="i2")
    generate.add_argument("--n", type=int)
    generate.add_argument("--k", type=int)
    generate.add_argument("--m", type=int)
    generate.add_argument("--d", type=int)
    generate.set_defaults(func=cmd_generate)

    search = sub.add_parser(
        "search", parents=[common], help="look for bad instances"
    )
    search.add_argument("problem", choices=PROBLEMS)
    search.add_argument("method", choices=("local", "evolve"))
    search.add_argument("--budget", type=int, default=None)
    search.add_argument("--wall-clock", type=float, default=None)
    search.add_argument("--noise", type=float, default=None)
    search.add_argument("--items", type=int, default=None)
    search.add_argument("--points", type=int, default=8)
    search.add_argument("--pairs", type=int, default=14)
    search.add_argument("--trials", type=int, default=10_000)
    search.add_argument("--opt-budget", "--opt-budget-seconds",
                        dest="opt_budget", type=float, default=10.0)
    search.add_argument("--provider", choices=("mock", "http"), default="mock")
    search.add_argument("--script", help="mock provider reply file, one per line")
    search.add_argument("--endpoint", help="http provider URL")
    search.add_argument("--model", help="http provider model name")
    search.add_argument("--temperature", type=float, default=1.0)
    search.set_defaults(func=cmd_search)

    reproduce = sub.add_parser(
        "reproduce", parents=[common], help="recompute reference tables"
    )
    reproduce.add_argument(
        "target",
        choices=("table3", "knapsack-ratios", "clustering-poh", "binpack-ratio"),
    )
    reproduce.add_argument("--max-d", type=int, default=4)
    reproduce.add_argument("--max-k", type=int, default=3)
    reproduce.add_argument("--opt-budget", "--opt-budget-seconds",
                           dest="opt_budget", type=float, default=10.0)
    reproduce.add_argument("--d", type=int, default=None)
    reproduce.add_argument("--m", type=int, default=6)
    reproduce.add_argument("--trials", type=int, default=10_000)
    reproduce.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstanceParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ProviderError as exc:
        print(f"provider failed: {exc}", file=sys.stderr)
        return EXIT_PROVIDER


if __name__ == "__main__":
    raise SystemExit(main())
