"""Exact-rational linear programming.

A dense two-phase tableau simplex with Bland's rule. Bland's rule never
cycles, and with exact arithmetic that is a termination proof, which is the
whole reason this exists instead of a floating-point solver: the equilibrium
predicates downstream are decided by equalities.

Arithmetic inside the tableau runs on ``gmpy2.mpq`` for speed; the public
surface speaks ``fractions.Fraction`` only.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import gmpy2

_ZERO = gmpy2.mpq(0)
_ONE = gmpy2.mpq(1)


def _mpq(q: Any):
    if isinstance(q, Fraction):
        return gmpy2.mpq(q.numerator, q.denominator)
    return gmpy2.mpq(q)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class Relation(str, enum.Enum):
    GE = ">="
    LE = "<="
    EQ = "=="


@dataclass(frozen=True)
class Constraint:
    coefficients: tuple[Fraction, ...]
    relation: Relation
    rhs: Fraction

    def lhs(self, x: Sequence[Fraction]) -> Fraction:
        return sum((a * v for a, v in zip(self.coefficients, x) if a), Fraction(0))

    def holds(self, x: Sequence[Fraction]) -> bool:
        value = self.lhs(x)
        if self.relation is Relation.GE:
            return value >= self.rhs
        if self.relation is Relation.LE:
            return value <= self.rhs
        return value == self.rhs


@dataclass
class LinearProgram:
    """``maximize objective . x`` subject to linear constraints.

    Variables are non-negative unless their ``nonneg`` flag is cleared.
    """

    objective: list[Fraction]
    constraints: list[Constraint] = field(default_factory=list)
    nonneg: list[bool] | None = None

    def __post_init__(self):
        self.objective = [Fraction(c) for c in self.objective]
        if self.nonneg is None:
            self.nonneg = [True] * len(self.objective)
        if len(self.nonneg) != len(self.objective):
            raise ValueError("nonneg flags must match the number of variables")
        for i, con in enumerate(self.constraints):
            if len(con.coefficients) != len(self.objective):
                raise ValueError(
                    f"constraint {i} has {len(con.coefficients)} coefficients, expected {len(self.objective)}"
                )

    @property
    def variable_count(self) -> int:
        return len(self.objective)

    def add(self, coefficients: Sequence[Any], relation: str | Relation, rhs: Any) -> None:
        coefficients = tuple(Fraction(a) for a in coefficients)
        if len(coefficients) != self.variable_count:
            raise ValueError(f"expected {self.variable_count} coefficients, got {len(coefficients)}")
        self.constraints.append(Constraint(coefficients, Relation(relation), Fraction(rhs)))

    def is_feasible_point(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.variable_count:
            return False
        if any(flag and v < 0 for flag, v in zip(self.nonneg, x)):
            return False
        return all(con.holds(x) for con in self.constraints)

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x) if c), Fraction(0))


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    solution: tuple[Fraction, ...] | None = None
    value: Fraction | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Rows ``B^-1 A | B^-1 b`` with an explicit basis list."""

    def __init__(self, rows: list[list], rhs: list, basis: list[int], width: int):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.width = width

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        inv = _ONE / row[c]
        if inv != _ONE:
            for j in range(self.width):
                if row[j]:
                    row[j] *= inv
            self.rhs[r] *= inv
        nz = [j for j in range(self.width) if row[j]]
        b = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[c]
            if not f:
                continue
            for j in nz:
                other[j] -= f * row[j]
            self.rhs[i] -= f * b
        self.basis[r] = c

    def reduced_costs(self, cost: list) -> tuple[list, Any]:
        """Reduced costs ``c_j - c_B B^-1 A_j`` and the current objective value."""
        red = list(cost)
        value = _ZERO
        for i, bvar in enumerate(self.basis):
            cb = cost[bvar]
            if not cb:
                continue
            row = self.rows[i]
            for j in range(self.width):
                if row[j]:
                    red[j] -= cb * row[j]
            value += cb * self.rhs[i]
        return red, value

    def run(self, cost: list, allowed: int) -> bool:
        """Maximize ``cost`` with Bland's rule over columns ``< allowed``.

        Returns False when the objective is unbounded.
        """
        red, _ = self.reduced_costs(cost)
        while True:
            enter = next((j for j in range(allowed) if red[j] > 0), None)
            if enter is None:
                return True
            leave = None
            best = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and self.basis[i] < self.basis[leave])
                    ):
                        best, leave = ratio, i
            if leave is None:
                return False
            self.pivot(leave, enter)
            f = red[enter]
            row = self.rows[leave]
            for j in range(self.width):
                if row[j]:
                    red[j] -= f * row[j]


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Solve ``lp`` exactly. The returned optimum is a basic feasible solution."""
    n = lp.variable_count
    # column layout: split free variables, then one slack/surplus per inequality,
    # then artificials
    columns: list[tuple[int, int]] = []  # (original variable, sign)
    for v in range(n):
        columns.append((v, 1))
        if not lp.nonneg[v]:
            columns.append((v, -1))
    structural = len(columns)

    rows_data = []
    for con in lp.constraints:
        coeffs = [_mpq(con.coefficients[v]) * sign for v, sign in columns]
        rhs = _mpq(con.rhs)
        rel = con.relation
        if rhs < 0:
            coeffs = [-a for a in coeffs]
            rhs = -rhs
            rel = {Relation.GE: Relation.LE, Relation.LE: Relation.GE, Relation.EQ: Relation.EQ}[rel]
        rows_data.append((coeffs, rel, rhs))

    slack_count = sum(1 for _, rel, _ in rows_data if rel is not Relation.EQ)
    art_rows = [i for i, (_, rel, _) in enumerate(rows_data) if rel is not Relation.LE]
    width = structural + slack_count + len(art_rows)
    first_art = structural + slack_count

    rows, rhs, basis = [], [], []
    slack_col = structural
    art_col = first_art
    for coeffs, rel, b in rows_data:
        row = coeffs + [_ZERO] * (width - structural)
        if rel is Relation.LE:
            row[slack_col] = _ONE
            basis.append(slack_col)
            slack_col += 1
        else:
            if rel is Relation.GE:
                row[slack_col] = -_ONE
                slack_col += 1
            row[art_col] = _ONE
            basis.append(art_col)
            art_col += 1
        rows.append(row)
        rhs.append(b)

    tab = _Tableau(rows, rhs, basis, width)

    if art_rows:
        phase1 = [_ZERO] * first_art + [-_ONE] * (width - first_art)
        tab.run(phase1, width)
        if any(tab.rhs[i] for i, bv in enumerate(tab.basis) if bv >= first_art):
            return LpOutcome(LpStatus.INFEASIBLE)
        # drive zero-level artificials out of the basis; drop redundant rows
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= first_art:
                row = tab.rows[i]
                col = next((j for j in range(first_art) if row[j]), None)
                if col is None:
                    del tab.rows[i], tab.rhs[i], tab.basis[i]
                    continue
                tab.pivot(i, col)
            i += 1
        for row in tab.rows:
            del row[first_art:]
        tab.width = first_art

    cost = [_ZERO] * tab.width
    for j, (v, sign) in enumerate(columns):
        cost[j] = _mpq(lp.objective[v]) * sign
    if not tab.run(cost, tab.width):
        return LpOutcome(LpStatus.UNBOUNDED)

    values = [_ZERO] * structural
    for i, bv in enumerate(tab.basis):
        if bv < structural:
            values[bv] = tab.rhs[i]
    x = [Fraction(0)] * n
    for j, (v, sign) in enumerate(columns):
        if values[j]:
            x[v] += _frac(values[j]) * sign
    x = tuple(x)
    return LpOutcome(LpStatus.OPTIMAL, x, lp.value(x))
