"""A tiny, safe expression language for instance-generating programs.

Grammar, version 1. An expression is one of:

    number                     integer or decimal literal, read as a rational
    e1 + e2, e1 - e2, e1 * e2, e1 / e2, e1 ** e2
    -e, +e
    (e1, e2, ...)              tuple
    [e1, e2, ...]              list
    repeat(count, expr)        list holding `count` copies of `expr`
    concat(l1, l2, ...)        list concatenation
    mapr(i, start, stop, body) [body for i = start..stop], bounds inclusive

Exponents must be small integers. Scalars are exact Fractions; the literal
0.2 means exactly 1/5. Evaluation is pure and budgeted: a step counter caps
tree walking, the list builders cap output length, and arithmetic caps
operand size, so an untrusted program can neither hang nor exhaust memory.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from fractions import Fraction

DSL_VERSION = 1

MAX_SOURCE_CHARS = 20_000
MAX_STEPS = 200_000
MAX_LIST_ITEMS = 50_000
MAX_EXPONENT = 64
MAX_NUMBER_BITS = 512


class DslParseError(ValueError):
    """The source text is not a program of this language."""


class DslEvalError(ValueError):
    """A well-formed program failed while running: types, budgets, zero division."""


_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_BUILTINS = ("repeat", "concat", "mapr")


def _parse(source: str) -> ast.expr:
    if not source.strip():
        raise DslParseError("empty program")
    if len(source) > MAX_SOURCE_CHARS:
        raise DslParseError("program text too long")
    try:
        tree = ast.parse(source, mode="eval")
    except (SyntaxError, ValueError) as exc:
        raise DslParseError(f"syntax: {exc}") from exc
    _check(tree.body)
    return tree.body


def _check(node: ast.expr) -> None:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise DslParseError(f"literal {node.value!r} is not a number")
    elif isinstance(node, ast.Name):
        pass  # bound by mapr or rejected at evaluation time
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _BINOPS):
            raise DslParseError("operator not in the language")
        _check(node.left)
        _check(node.right)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise DslParseError("operator not in the language")
        _check(node.operand)
    elif isinstance(node, (ast.Tuple, ast.List)):
        for element in node.elts:
            _check(element)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _BUILTINS:
            raise DslParseError("only repeat, concat and mapr may be called")
        if node.keywords:
            raise DslParseError("keyword arguments are not in the language")
        if node.func.id == "repeat" and len(node.args) != 2:
            raise DslParseError("repeat takes (count, expr)")
        if node.func.id == "concat" and not node.args:
            raise DslParseError("concat needs at least one list")
        if node.func.id == "mapr":
            if len(node.args) != 4 or not isinstance(node.args[0], ast.Name):
                raise DslParseError("mapr takes (name, start, stop, body)")
            for argument in node.args[1:]:
                _check(argument)
            return
        for argument in node.args:
            _check(argument)
    else:
        raise DslParseError(f"{type(node).__name__} is not in the language")


@dataclass(frozen=True)
class DslProgram:
    """Validated source text; evaluation happens in dsl_eval."""

    source: str

    def __post_init__(self):
        _parse(self.source)


def _kind(value) -> str:
    if isinstance(value, Fraction):
        return "number"
    return "list" if isinstance(value, list) else "tuple"


def dsl_eval(program: DslProgram, clip_length: int | None = None):
    """Run the program; every list in the result is clipped to clip_length."""
    root = _parse(program.source)
    steps = 0

    def tick() -> None:
        nonlocal steps
        steps += 1
        if steps > MAX_STEPS:
            raise DslEvalError("step budget exceeded")

    def scalar(value, what: str) -> Fraction:
        if not isinstance(value, Fraction):
            raise DslEvalError(f"{what} needs a number, got a {_kind(value)}")
        return value

    def guard(value: Fraction) -> Fraction:
        if (
            value.numerator.bit_length() > MAX_NUMBER_BITS
            or value.denominator.bit_length() > MAX_NUMBER_BITS
        ):
            raise DslEvalError("number grew past the size budget")
        return value

    def integer(value, what: str, low: int, high: int) -> int:
        value = scalar(value, what)
        if value.denominator != 1:
            raise DslEvalError(f"{what} must be an integer, got {value}")
        n = value.numerator
        if not low <= n <= high:
            raise DslEvalError(f"{what} {n} outside [{low}, {high}]")
        return n

    def ev(node: ast.expr, env: dict):
        tick()
        if isinstance(node, ast.Constant):
            if isinstance(node.value, int):
                return Fraction(node.value)
            return Fraction(str(node.value))  # decimal reading: 0.2 is 1/5
        if isinstance(node, ast.Name):
            try:
                return env[node.id]
            except KeyError:
                raise DslEvalError(f"unbound name {node.id!r}") from None
        if isinstance(node, ast.UnaryOp):
            operand = scalar(ev(node.operand, env), "unary operand")
            return -operand if isinstance(node.op, ast.USub) else operand
        if isinstance(node, ast.BinOp):
            left = scalar(ev(node.left, env), "left operand")
            right = scalar(ev(node.right, env), "right operand")
            if isinstance(node.op, ast.Add):
                return guard(left + right)
            if isinstance(node.op, ast.Sub):
                return guard(left - right)
            if isinstance(node.op, ast.Mult):
                return guard(left * right)
            if isinstance(node.op, ast.Div):
                if right == 0:
                    raise DslEvalError("division by zero")
                return guard(left / right)
            exponent = integer(right, "exponent", -MAX_EXPONENT, MAX_EXPONENT)
            if left == 0 and exponent < 0:
                raise DslEvalError("zero raised to a negative power")
            return guard(left**exponent)
        if isinstance(node, ast.Tuple):
            return tuple(ev(element, env) for element in node.elts)
        if isinstance(node, ast.List):
            return [ev(element, env) for element in node.elts]
        # calls: repeat / concat / mapr, already arity-checked by the parser
        name = node.func.id
        if name == "repeat":
            count = integer(ev(node.args[0], env), "repeat count", 0, MAX_LIST_ITEMS)
            if count == 0:
                return []
            return [ev(node.args[1], env)] * count
        if name == "concat":
            out: list = []
            for argument in node.args:
                part = ev(argument, env)
                if not isinstance(part, list):
                    raise DslEvalError(f"concat needs lists, got a {_kind(part)}")
                out.extend(part)
                if len(out) > MAX_LIST_ITEMS:
                    raise DslEvalError("concat output past the length budget")
            return out
        variable = node.args[0].id
        start = integer(ev(node.args[1], env), "mapr start", -MAX_LIST_ITEMS, MAX_LIST_ITEMS)
        stop = integer(ev(node.args[2], env), "mapr stop", -MAX_LIST_ITEMS, MAX_LIST_ITEMS)
        if stop - start + 1 > MAX_LIST_ITEMS:
            raise DslEvalError("mapr range past the length budget")
        return [
            ev(node.args[3], {**env, variable: Fraction(i)})
            for i in range(start, stop + 1)
        ]

    return _clip(ev(root, {}), clip_length)


def _clip(value, clip_length: int | None):
    if clip_length is None:
        return value
    if isinstance(value, list):
        return [_clip(element, clip_length) for element in value[:clip_length]]
    if isinstance(value, tuple):
        return tuple(_clip(element, clip_length) for element in value)
    return value
