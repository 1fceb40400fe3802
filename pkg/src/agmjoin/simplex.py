"""Exact two-phase simplex over rationals, sized for tiny programs.

Everything is a ``fractions.Fraction``: feasibility and optimality are
decided exactly, never by epsilon.  Bland's rule keeps the pivoting
finite.  The cover programs this package solves have a handful of
variables, so a dense tableau is the right tool.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import AgmJoinError

Vector = tuple[Fraction, ...]


class InfeasibleProgramError(AgmJoinError):
    """No point satisfies the constraints."""


class UnboundedProgramError(AgmJoinError):
    """The objective can be pushed below any bound."""


@dataclass(frozen=True)
class LinearProgram:
    """min c.x  s.t.  ge_rows: a.x >= b,  eq_rows: a.x == b,  x >= 0."""

    c: Vector
    ge_rows: tuple[tuple[Vector, Fraction], ...] = ()
    eq_rows: tuple[tuple[Vector, Fraction], ...] = field(default=())

    def __post_init__(self) -> None:
        n = len(self.c)
        for a, _ in self.ge_rows + self.eq_rows:
            if len(a) != n:
                raise ValueError(f"row width {len(a)} != {n} variables")

    def with_eq(self, a: Sequence[Fraction], b: Fraction) -> "LinearProgram":
        return LinearProgram(self.c, self.ge_rows, self.eq_rows + ((tuple(a), b),))


def _pivot(rows: list[list[Fraction]], obj: list[Fraction], basis: list[int], r: int, col: int) -> None:
    piv = rows[r][col]
    rows[r] = [v / piv for v in rows[r]]
    for i, row in enumerate(rows):
        if i != r and row[col]:
            f = row[col]
            rows[i] = [v - f * w for v, w in zip(row, rows[r])]
    if obj[col]:
        f = obj[col]
        obj[:] = [v - f * w for v, w in zip(obj, rows[r])]
    basis[r] = col


def _run_simplex(rows: list[list[Fraction]], obj: list[Fraction], basis: list[int], ncols: int) -> None:
    """Bland's rule: enter lowest negative-reduced-cost column."""
    while True:
        enter = next((j for j in range(ncols) if obj[j] < 0), None)
        if enter is None:
            return
        leave = -1
        best: Fraction | None = None
        for i, row in enumerate(rows):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            raise UnboundedProgramError("no leaving row")
        _pivot(rows, obj, basis, leave, enter)


def minimize(lp: LinearProgram) -> tuple[Fraction, Vector]:
    """Solve the program, returning (optimal value, a basic optimal point)."""
    n = len(lp.c)
    nge = len(lp.ge_rows)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    zero = Fraction(0)
    for k, (a, b) in enumerate(lp.ge_rows + lp.eq_rows):
        surplus = [zero] * nge
        if k < nge:
            surplus[k] = Fraction(-1)
        row = list(a) + surplus
        if b < 0:
            row = [-v for v in row]
            b = -b
        rows.append(row)
        rhs.append(b)
    m = len(rows)
    width = n + nge
    # one artificial per row gives the identity starting basis
    for i, row in enumerate(rows):
        row.extend(Fraction(1) if j == i else zero for j in range(m))
        row.append(rhs[i])
    basis = [width + i for i in range(m)]

    # phase 1: minimize the artificial mass
    obj = [zero] * (width + m + 1)
    for i, row in enumerate(rows):
        for j in range(width + m + 1):
            obj[j] -= row[j]
    for i in range(m):
        obj[width + i] += Fraction(1)
    _run_simplex(rows, obj, basis, width + m)
    if -obj[-1] != 0:
        raise InfeasibleProgramError("artificial mass stays positive")
    # drive surviving artificials out of the degenerate basis
    for i in range(m):
        if basis[i] >= width:
            col = next((j for j in range(width) if rows[i][j] != 0), None)
            if col is not None:
                _pivot(rows, obj, basis, i, col)
    live = [i for i in range(m) if basis[i] < width]
    rows = [rows[i][:width] + [rows[i][-1]] for i in live]
    basis = [basis[i] for i in live]

    # phase 2: the real objective, artificial columns gone
    cost = list(lp.c) + [zero] * nge
    obj = cost + [zero]
    for i, row in enumerate(rows):
        cb = cost[basis[i]]
        if cb:
            obj = [v - cb * w for v, w in zip(obj, row)]
    _run_simplex(rows, obj, basis, width)

    x = [zero] * (width)
    for i, row in enumerate(rows):
        x[basis[i]] = row[-1]
    return -obj[-1], tuple(x[:n])


def lexmin_minimize(lp: LinearProgram) -> tuple[Fraction, Vector]:
    """Optimal value plus the lexicographically smallest optimal point.

    Refines coordinate by coordinate: pin the optimal value, minimize
    x0, pin it, minimize x1, and so on.  The final point is the unique
    lex-least optimum, which is always a vertex.
    """
    n = len(lp.c)
    zero = Fraction(0)
    value, _ = minimize(lp)
    cur = lp.with_eq(lp.c, value)
    pins: list[Fraction] = []
    for i in range(n):
        e = tuple(Fraction(1) if j == i else zero for j in range(n))
        cur_lp = LinearProgram(e, cur.ge_rows, cur.eq_rows)
        vi, _ = minimize(cur_lp)
        pins.append(vi)
        cur = cur.with_eq(e, vi)
    return value, tuple(pins)
