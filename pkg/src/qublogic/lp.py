"""Small dense two-phase simplex over exact rationals.

Sized for the order-representability problems this package solves (a few
dozen rows and columns); Bland's rule keeps it cycle-free.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


def solve_lp(objective: Sequence[Fraction],
             a_ub: Sequence[Sequence[Fraction]], b_ub: Sequence[Fraction],
             a_eq: Sequence[Sequence[Fraction]], b_eq: Sequence[Fraction],
             ) -> tuple[str, list[Fraction] | None, Fraction | None]:
    """Maximize objective . x subject to a_ub x <= b_ub, a_eq x = b_eq, x >= 0.

    Returns (status, x, value) with status "optimal", "infeasible", or
    "unbounded".
    """
    n = len(objective)
    rows: list[tuple[list[Fraction], Fraction, str]] = []
    for coeffs, rhs in zip(a_ub, b_ub):
        coeffs = [Fraction(v) for v in coeffs]
        rhs = Fraction(rhs)
        if rhs >= 0:
            rows.append((coeffs, rhs, "le"))
        else:
            rows.append(([-v for v in coeffs], -rhs, "ge"))
    for coeffs, rhs in zip(a_eq, b_eq):
        coeffs = [Fraction(v) for v in coeffs]
        rhs = Fraction(rhs)
        if rhs < 0:
            coeffs, rhs = [-v for v in coeffs], -rhs
        rows.append((coeffs, rhs, "eq"))

    m = len(rows)
    nslack = sum(1 for r in rows if r[2] in ("le", "ge"))
    nart = sum(1 for r in rows if r[2] in ("ge", "eq"))
    total = n + nslack + nart
    tab = [[ZERO] * (total + 1) for _ in range(m)]
    basis = [0] * m
    art_cols: set[int] = set()
    si, ai = n, n + nslack
    for i, (coeffs, rhs, kind) in enumerate(rows):
        for j, v in enumerate(coeffs):
            tab[i][j] = v
        tab[i][total] = rhs
        if kind == "le":
            tab[i][si] = ONE
            basis[i] = si
            si += 1
        elif kind == "ge":
            tab[i][si] = -ONE
            si += 1
            tab[i][ai] = ONE
            basis[i] = ai
            art_cols.add(ai)
            ai += 1
        else:
            tab[i][ai] = ONE
            basis[i] = ai
            art_cols.add(ai)
            ai += 1

    def run(cost: list[Fraction], banned: set[int]) -> str:
        while True:
            # reduced costs z_j - c_j via the current basis
            zrow = [ZERO] * (total + 1)
            for i in range(m):
                cb = cost[basis[i]]
                if cb:
                    for j in range(total + 1):
                        zrow[j] += cb * tab[i][j]
            entering = -1
            for j in range(total):
                if j in banned:
                    continue
                if zrow[j] - cost[j] < 0:
                    entering = j
                    break
            if entering < 0:
                return "optimal"
            leaving, best = -1, None
            for i in range(m):
                if tab[i][entering] > 0:
                    ratio = tab[i][total] / tab[i][entering]
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                        leaving, best = i, ratio
            if leaving < 0:
                return "unbounded"
            _pivot(tab, basis, leaving, entering, total)

    if art_cols:
        cost1 = [ZERO] * total
        for j in art_cols:
            cost1[j] = Fraction(-1)
        status = run(cost1, banned=set())
        value1 = sum(tab[i][total] for i in range(m) if basis[i] in art_cols)
        if status != "optimal" or value1 != 0:
            return "infeasible", None, None
        # drive leftover (degenerate) artificials out of the basis
        for i in range(m):
            if basis[i] in art_cols:
                for j in range(total):
                    if j not in art_cols and tab[i][j] != 0:
                        _pivot(tab, basis, i, j, total)
                        break

    cost2 = [Fraction(objective[j]) if j < n else ZERO for j in range(total)]
    status = run(cost2, banned=art_cols)
    if status != "optimal":
        return status, None, None
    x = [ZERO] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = tab[i][total]
    value = sum(Fraction(objective[j]) * x[j] for j in range(n))
    return "optimal", x, value


def _pivot(tab: list[list[Fraction]], basis: list[int], row: int, col: int, total: int) -> None:
    pv = tab[row][col]
    tab[row] = [v / pv for v in tab[row]]
    for i in range(len(tab)):
        if i != row and tab[i][col] != 0:
            factor = tab[i][col]
            tab[i] = [a - factor * b for a, b in zip(tab[i], tab[row])]
    basis[row] = col
