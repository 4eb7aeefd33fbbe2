"""Exact rational linear programming.

A dense bounded-variable simplex over exact rationals. Variable bounds are
handled natively (a variable may sit at either bound while nonbasic), so
box constraints never become tableau rows. Uses gmpy2's rationals when
available, stdlib Fraction otherwise; the API always speaks Fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

try:
    from gmpy2 import mpq as _Q  # noqa: N811
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _Q = Fraction

RELATIONS = ("<=", "=", ">=")

Bound = Fraction | None  # None encodes the missing (infinite) bound


def _to_bound(x) -> Bound:
    return None if x is None else Fraction(x)


@dataclass(frozen=True)
class LinearProgram:
    """sense 'min' or 'max'; rows are (coefficients, relation, rhs) triples.

    Default variable bounds are [0, +inf); pass None inside lower/upper for
    an infinite end.
    """

    sense: str
    objective: tuple[Fraction, ...]
    rows: tuple[tuple[tuple[Fraction, ...], str, Fraction], ...] = ()
    lower: tuple[Bound, ...] | None = None
    upper: tuple[Bound, ...] | None = None

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        obj = tuple(Fraction(c) for c in self.objective)
        object.__setattr__(self, "objective", obj)
        n = len(obj)
        if n == 0:
            raise ValueError("model needs at least one variable")
        rows = []
        for coeffs, rel, rhs in self.rows:
            coeffs = tuple(Fraction(c) for c in coeffs)
            if len(coeffs) != n:
                raise ValueError("row length disagrees with variable count")
            if rel not in RELATIONS:
                raise ValueError(f"relation must be one of {RELATIONS}, got {rel!r}")
            rows.append((coeffs, rel, Fraction(rhs)))
        object.__setattr__(self, "rows", tuple(rows))
        lower = (
            tuple(Fraction(0) for _ in range(n))
            if self.lower is None
            else tuple(_to_bound(x) for x in self.lower)
        )
        upper = (
            tuple(None for _ in range(n))
            if self.upper is None
            else tuple(_to_bound(x) for x in self.upper)
        )
        if len(lower) != n or len(upper) != n:
            raise ValueError("bounds length disagrees with variable count")
        for lo, up in zip(lower, upper):
            if lo is not None and up is not None and lo > up:
                raise ValueError(f"crossing bounds [{lo}, {up}]")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def nvars(self) -> int:
        return len(self.objective)


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    values: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None


def fix_variable(lp: LinearProgram, index: int, value) -> LinearProgram:
    """A copy of the model with one variable's bounds collapsed to a point."""
    value = Fraction(value)
    if not 0 <= index < lp.nvars:
        raise IndexError(f"no variable {index}")
    lo, up = lp.lower[index], lp.upper[index]
    if (lo is not None and value < lo) or (up is not None and value > up):
        raise ValueError(f"value {value} outside bounds [{lo}, {up}] of variable {index}")
    lower = lp.lower[:index] + (value,) + lp.lower[index + 1 :]
    upper = lp.upper[:index] + (value,) + lp.upper[index + 1 :]
    return LinearProgram(lp.sense, lp.objective, lp.rows, lower, upper)


def render_lp(lp: LinearProgram) -> str:
    """Human-readable dump for bug reports."""
    out = [f"{lp.sense} " + " + ".join(f"{c}*x{j}" for j, c in enumerate(lp.objective))]
    for coeffs, rel, rhs in lp.rows:
        terms = " + ".join(f"{c}*x{j}" for j, c in enumerate(coeffs) if c != 0) or "0"
        out.append(f"  {terms} {rel} {rhs}")
    for j in range(lp.nvars):
        lo = "-inf" if lp.lower[j] is None else str(lp.lower[j])
        up = "+inf" if lp.upper[j] is None else str(lp.upper[j])
        out.append(f"  x{j} in [{lo}, {up}]")
    return "\n".join(out)


_BASIC, _AT_LOWER, _AT_UPPER, _FREE = 0, 1, 2, 3


class _Simplex:
    """Two-phase dense bounded-variable simplex on exact rationals.

    Pricing is steepest-coefficient with smallest-index ties; after a long
    run of degenerate pivots it switches permanently to the smallest-index
    rule, which cannot cycle, so termination is guaranteed and every choice
    is deterministic.
    """

    def __init__(self, lp: LinearProgram):
        self.n_struct = lp.nvars
        m = len(lp.rows)
        sign = 1 if lp.sense == "min" else -1
        self.cost = [sign * _Q(c) for c in lp.objective]
        self.lower: list = [None if b is None else _Q(b) for b in lp.lower]
        self.upper: list = [None if b is None else _Q(b) for b in lp.upper]
        self.rows = [[_Q(c) for c in coeffs] for coeffs, _, _ in lp.rows]
        self.rhs = [_Q(rhs) for _, _, rhs in lp.rows]
        zero = _Q(0)
        # one slack per row: coefficient +1, bounds encode the relation
        for _, rel, _ in lp.rows:
            self.cost.append(zero)
            if rel == "<=":
                self.lower.append(zero)
                self.upper.append(None)
            elif rel == "=":
                self.lower.append(zero)
                self.upper.append(zero)
            else:
                self.lower.append(None)
                self.upper.append(zero)
        self.m = m
        self.ncols = self.n_struct + m

    def _initial_point(self):
        self.where = []
        self.value = []
        for j in range(self.ncols):
            lo, up = self.lower[j], self.upper[j]
            if lo is not None:
                self.where.append(_AT_LOWER)
                self.value.append(lo)
            elif up is not None:
                self.where.append(_AT_UPPER)
                self.value.append(up)
            else:
                self.where.append(_FREE)
                self.value.append(_Q(0))

    def solve(self) -> LpSolution:
        self._initial_point()
        m, n_struct = self.m, self.n_struct
        zero = _Q(0)
        one = _Q(1)
        # residual each row must absorb after structural vars sit at bounds
        resid = []
        for i in range(m):
            row = self.rows[i]
            acc = self.rhs[i]
            for j in range(n_struct):
                v = self.value[j]
                if v:
                    acc -= row[j] * v
            resid.append(acc)

        # tableau columns: structural, slacks, then artificials as needed
        tableau: list[list] = []
        self.basis: list[int] = []
        self.xb: list = []
        art_rows = []
        for i in range(m):
            slack = n_struct + i
            lo, up = self.lower[slack], self.upper[slack]
            if (lo is None or resid[i] >= lo) and (up is None or resid[i] <= up):
                self.basis.append(slack)
                self.where[slack] = _BASIC
                self.xb.append(resid[i])
            else:
                clamped = lo if (lo is not None and resid[i] < lo) else up
                self.value[slack] = clamped
                violation = resid[i] - clamped
                art_rows.append((i, one if violation > 0 else -one))
                self.basis.append(-1)  # patched below
                self.xb.append(abs(violation))

        n_art = len(art_rows)
        self.ncols += n_art
        for k, (i, sigma) in enumerate(art_rows):
            self.cost.append(zero)
            self.lower.append(zero)
            self.upper.append(None)
            self.where.append(_BASIC)
            self.value.append(zero)
            self.basis[i] = n_struct + m + k

        art_sign = {i: sigma for i, sigma in art_rows}
        for i in range(m):
            sigma = art_sign.get(i, one)
            row = [sigma * c for c in self.rows[i]]
            row.extend(sigma if i == t else zero for t in range(m))
            row.extend(one if i == t else zero for t, _ in art_rows)
            tableau.append(row)
        self.tab = tableau

        if n_art:
            phase1_cost = [zero] * (n_struct + m) + [one] * n_art
            status = self._optimize(phase1_cost)
            if status != LpStatus.OPTIMAL:  # pragma: no cover - cannot happen
                raise RuntimeError("phase 1 cannot be unbounded")
            total = sum(
                (self.xb[i] for i in range(m) if self.basis[i] >= n_struct + m),
                zero,
            )
            for j in range(n_struct + m, self.ncols):
                if self.where[j] != _BASIC:
                    self.value[j] = zero
            if total != 0:
                return LpSolution(LpStatus.INFEASIBLE)
            # artificials are pinned at zero for phase 2
            for j in range(n_struct + m, self.ncols):
                self.upper[j] = zero

        status = self._optimize(self.cost)
        if status != LpStatus.OPTIMAL:
            return LpSolution(status)
        values = [None] * self.ncols
        for j in range(self.ncols):
            values[j] = self.value[j]
        for i in range(m):
            values[self.basis[i]] = self.xb[i]
        out = tuple(
            Fraction(int(v.numerator), int(v.denominator)) for v in values[:n_struct]
        )
        return LpSolution(LpStatus.OPTIMAL, out, None)

    def _optimize(self, cost) -> LpStatus:
        m = self.m
        tab = self.tab
        basis = self.basis
        where, value = self.where, self.value
        lower, upper = self.lower, self.upper
        xb = self.xb
        zero = _Q(0)

        # reduced costs from scratch for this phase
        z = list(cost)
        for i in range(m):
            cb = cost[basis[i]]
            if cb:
                row = tab[i]
                for j in range(self.ncols):
                    if row[j]:
                        z[j] -= cb * row[j]

        bland = False
        stall = 0
        stall_limit = 100 + 2 * (m + self.ncols)
        while True:
            entering = -1
            direction = 0
            best_score = zero
            for j in range(self.ncols):
                w = where[j]
                if w == _BASIC:
                    continue
                lo, up = lower[j], upper[j]
                if lo is not None and up is not None and lo == up:
                    continue  # fixed variable can never move
                rc = z[j]
                if w == _AT_LOWER:
                    if rc < zero:
                        score, d = -rc, 1
                    else:
                        continue
                elif w == _AT_UPPER:
                    if rc > zero:
                        score, d = rc, -1
                    else:
                        continue
                else:  # free at zero
                    if rc == zero:
                        continue
                    score, d = abs(rc), (1 if rc < zero else -1)
                if bland:
                    entering, direction = j, d
                    break
                if score > best_score:
                    best_score, entering, direction = score, j, d
            if entering < 0:
                return LpStatus.OPTIMAL

            q = entering
            lo_q, up_q = lower[q], upper[q]
            t_best = None
            leaving_row = -1
            if lo_q is not None and up_q is not None:
                t_best = up_q - lo_q  # bound flip distance
            for i in range(m):
                d_i = tab[i][q]
                if not d_i:
                    continue
                delta = -direction * d_i  # rate of change of xb[i]
                b = basis[i]
                if delta > zero:
                    cap = upper[b]
                    if cap is None:
                        continue
                    limit = (cap - xb[i]) / delta
                else:
                    cap = lower[b]
                    if cap is None:
                        continue
                    limit = (cap - xb[i]) / delta
                if t_best is None or limit < t_best or (
                    limit == t_best and leaving_row >= 0 and basis[i] < basis[leaving_row]
                ):
                    t_best = limit
                    leaving_row = i
            if t_best is None:
                return LpStatus.UNBOUNDED

            if t_best == zero:
                stall += 1
                if stall > stall_limit:
                    bland = True
            else:
                stall = 0

            step = direction * t_best
            if leaving_row < 0:
                # entering variable flips to its opposite bound
                if step:
                    col_q = q
                    for i in range(m):
                        d_i = tab[i][col_q]
                        if d_i:
                            xb[i] -= step * d_i
                value[q] = up_q if direction == 1 else lo_q
                where[q] = _AT_UPPER if direction == 1 else _AT_LOWER
                continue

            r = leaving_row
            enter_value = value[q] + step
            if step:
                for i in range(m):
                    if i != r:
                        d_i = tab[i][q]
                        if d_i:
                            xb[i] -= step * d_i
            leave = basis[r]
            delta_r = -direction * tab[r][q]
            if delta_r > zero:
                where[leave] = _AT_UPPER
                value[leave] = upper[leave]
            else:
                where[leave] = _AT_LOWER
                value[leave] = lower[leave]

            piv = tab[r][q]
            row_r = tab[r]
            if piv != 1:
                inv = 1 / piv
                row_r = [c * inv for c in row_r]
                tab[r] = row_r
            for i in range(m):
                if i == r:
                    continue
                f = tab[i][q]
                if f:
                    row_i = tab[i]
                    tab[i] = [a - f * b for a, b in zip(row_i, row_r)]
            f = z[q]
            if f:
                z = [a - f * b for a, b in zip(z, row_r)]
            basis[r] = q
            where[q] = _BASIC
            xb[r] = enter_value
            self.tab = tab
            self.z = z


def _check_solution(lp: LinearProgram, values: Sequence[Fraction]) -> Fraction:
    """Exact residual check; returns the objective value."""
    for j, v in enumerate(values):
        lo, up = lp.lower[j], lp.upper[j]
        if (lo is not None and v < lo) or (up is not None and v > up):
            raise RuntimeError(f"solution violates bounds of variable {j}")
    for coeffs, rel, rhs in lp.rows:
        lhs = sum(c * v for c, v in zip(coeffs, values))
        ok = lhs <= rhs if rel == "<=" else lhs >= rhs if rel == ">=" else lhs == rhs
        if not ok:
            raise RuntimeError(f"solution violates row {coeffs} {rel} {rhs}")
    return sum(c * v for c, v in zip(lp.objective, values))


def solve(lp: LinearProgram) -> LpSolution:
    """Exact status and, when optimal, an exact optimal vertex."""
    result = _Simplex(lp).solve()
    if result.status != LpStatus.OPTIMAL:
        return result
    objective = _check_solution(lp, result.values)
    return LpSolution(LpStatus.OPTIMAL, result.values, objective)
