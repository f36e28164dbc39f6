"""Exact feasibility for small linear programs over the rationals.

Phase-one simplex on a dense ``Fraction`` tableau with Bland's rule, so it
terminates and never rounds.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .core import ResourceLimitError

Row = dict[int, Fraction]


def find_feasible_point(
    num_vars: int,
    equalities: Sequence[tuple[Row, Fraction]] = (),
    inequalities: Sequence[tuple[Row, Fraction]] = (),
    max_pivots: int = 100_000,
) -> list[Fraction] | None:
    """Return some ``x >= 0`` with ``row . x == rhs`` / ``row . x <= rhs``, or ``None``.

    Rows are sparse ``{variable: coefficient}`` maps.
    """
    rows: list[tuple[Row, Fraction]] = [(dict(r), Fraction(b)) for r, b in equalities]
    num_slack = len(inequalities)
    for j, (r, b) in enumerate(inequalities):
        row = dict(r)
        row[num_vars + j] = Fraction(1)
        rows.append((row, Fraction(b)))
    total = num_vars + num_slack
    m = len(rows)
    if m == 0:
        return [Fraction(0)] * num_vars

    # tableau columns: total structural/slack vars, then m artificials, then rhs
    width = total + m + 1
    tab: list[list[Fraction]] = []
    for i, (row, b) in enumerate(rows):
        line = [Fraction(0)] * width
        sign = -1 if b < 0 else 1
        for j, a in row.items():
            line[j] = Fraction(a) * sign
        line[total + i] = Fraction(1)
        line[-1] = b * sign
        tab.append(line)
    basis = [total + i for i in range(m)]

    # objective: minimise sum of artificials, expressed as reduced costs
    obj = [Fraction(0)] * width
    for line in tab:
        for j in range(total):
            obj[j] -= line[j]
        obj[-1] -= line[-1]

    pivots = 0
    while True:
        entering = next((j for j in range(total + m) if obj[j] < 0), None)
        if entering is None:
            break
        leaving = None
        best = None
        for i in range(m):
            a = tab[i][entering]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    best, leaving = ratio, i
        if leaving is None:  # cannot happen in phase one (objective bounded below)
            break
        _pivot(tab, obj, leaving, entering)
        basis[leaving] = entering
        pivots += 1
        if pivots > max_pivots:
            raise ResourceLimitError(f"LP exceeded {max_pivots} pivots")

    if obj[-1] != 0:
        return None
    x = [Fraction(0)] * total
    for i, var in enumerate(basis):
        if var < total:
            x[var] = tab[i][-1]
    return x[:num_vars]


def _pivot(tab: list[list[Fraction]], obj: list[Fraction], r: int, c: int) -> None:
    prow = tab[r]
    p = prow[c]
    if p != 1:
        for j, v in enumerate(prow):
            if v:
                prow[j] = v / p
    nz = [j for j, v in enumerate(prow) if v]
    for line in tab + [obj]:
        if line is prow:
            continue
        f = line[c]
        if f:
            for j in nz:
                line[j] -= f * prow[j]
