"""Exact two-phase simplex over ``gmpy2.mpq`` with Bland's rule.

Only feasibility and linear maximisation over ``{x : Mx = c, 0 <= x <= 1}``
are needed. Upper bounds already implied by a non-negative row (every BLP
column sits in a row summing to 1) are not added as explicit slack rows.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from ..errors import NotFeasible
from .program import BLP, LinearSystem, Rational

_ZERO = mpq(0)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _implied_unit_bound(rows, rhs, j: int) -> bool:
    for row, b in zip(rows, rhs):
        c = row[j]
        if c > 0 and b >= 0 and all(v >= 0 for v in row) and b <= c:
            return True
    return False


class Simplex:
    """A tableau kept feasible after phase 1 so that several objectives reuse it."""

    def __init__(self, system: LinearSystem, unit_bounds: bool | None = None):
        if unit_bounds is None:
            unit_bounds = system.kind == BLP
        n = system.ncols
        self.n = n
        rows = [[mpq(c) for c in row] for row in system.rows]
        rhs = [mpq(b) for b in system.rhs]
        extra = []
        if unit_bounds:
            extra = [j for j in range(n) if not _implied_unit_bound(rows, rhs, j)]
        width = n + len(extra)
        table = []
        for row, b in zip(rows, rhs):
            table.append(row + [_ZERO] * len(extra) + [b])
        for s, j in enumerate(extra):
            row = [_ZERO] * (width + 1)
            row[j] = mpq(1)
            row[n + s] = mpq(1)
            row[-1] = mpq(1)
            table.append(row)
        for row in table:
            if row[-1] < 0:
                for k in range(len(row)):
                    row[k] = -row[k]
        m = len(table)
        # artificial columns appended before the rhs
        for r, row in enumerate(table):
            art = [_ZERO] * m
            art[r] = mpq(1)
            row[width:width] = art
        self.width = width
        self.table = table
        self.basis = [width + r for r in range(m)]
        obj = [_ZERO] * (width + m + 1)
        for row in table:
            for k, v in enumerate(row):
                if v and not width <= k < width + m:
                    obj[k] -= v
        self.obj = obj
        self._run(limit=width + m)
        self.feasible = self.obj[-1] == 0
        if self.feasible:
            self._drop_artificials(m)

    def _pivot(self, r: int, e: int) -> None:
        prow = self.table[r]
        p = prow[e]
        if p != 1:
            inv = 1 / p
            prow = [v * inv if v else v for v in prow]
            self.table[r] = prow
        nz = [k for k, v in enumerate(prow) if v]
        for i, row in enumerate(self.table):
            if i != r:
                f = row[e]
                if f:
                    for k in nz:
                        row[k] -= f * prow[k]
        f = self.obj[e]
        if f:
            obj = self.obj
            for k in nz:
                obj[k] -= f * prow[k]
        self.basis[r] = e

    def _run(self, limit: int) -> bool:
        """Minimise the objective row; False when unbounded."""
        obj = self.obj
        table = self.table
        while True:
            e = next((k for k in range(limit) if obj[k] < 0), None)
            if e is None:
                return True
            best, best_ratio = None, None
            for i, row in enumerate(table):
                a = row[e]
                if a > 0:
                    ratio = row[-1] / a
                    if (best is None or ratio < best_ratio
                            or (ratio == best_ratio and self.basis[i] < self.basis[best])):
                        best, best_ratio = i, ratio
            if best is None:
                return False
            self._pivot(best, e)

    def _drop_artificials(self, m: int) -> None:
        w = self.width
        keep = []
        for r in range(len(self.table)):
            if self.basis[r] >= w:
                row = self.table[r]
                e = next((k for k in range(w) if row[k]), None)
                if e is None:
                    continue  # redundant equation
                self._pivot(r, e)
            keep.append(r)
        self.table = [self.table[r][:w] + [self.table[r][-1]] for r in keep]
        self.basis = [self.basis[r] for r in keep]
        self.obj = self.obj[:w] + [self.obj[-1]]

    def point(self) -> tuple[Fraction, ...]:
        x = [_ZERO] * self.width
        for r, b in enumerate(self.basis):
            x[b] = self.table[r][-1]
        return tuple(_frac(v) for v in x[: self.n])

    def support(self) -> set[int]:
        return {b for r, b in enumerate(self.basis) if b < self.n and self.table[r][-1] > 0}

    def maximize(self, c: Sequence[Rational]) -> tuple[Fraction, tuple[Fraction, ...]] | None:
        """Maximise ``c . x`` from the current basis; ``None`` when unbounded."""
        if not self.feasible:
            raise NotFeasible("system has no feasible point")
        obj = [_ZERO] * (self.width + 1)
        for j, v in enumerate(c):
            if v:
                obj[j] = -mpq(v)
        for r, b in enumerate(self.basis):
            f = obj[b]
            if f:
                row = self.table[r]
                for k, v in enumerate(row):
                    if v:
                        obj[k] -= f * v
        self.obj = obj
        if not self._run(limit=self.width):
            return None
        return _frac(self.obj[-1]), self.point()


def lp_feasible(system: LinearSystem) -> tuple[Fraction, ...] | None:
    """An exact feasible point of ``Mx = c, 0 <= x <= 1`` or ``None``."""
    lp = Simplex(system, unit_bounds=True)
    return lp.point() if lp.feasible else None


def maximize(system: LinearSystem, c: Sequence[Rational]):
    lp = Simplex(system, unit_bounds=True)
    if not lp.feasible:
        raise NotFeasible("system has no feasible point")
    return lp.maximize(c)


def variable_support(system: LinearSystem, lp: Simplex | None = None) -> frozenset[int]:
    """Columns positive at some feasible point (the support of a relative-interior point).

    Grows a support set ``S`` by maximising the sum of the columns outside it;
    any positive optimum reveals new columns, a zero optimum proves the rest
    vanish on the whole polytope. ``lp`` may be a solver already built for ``system``.
    """
    lp = lp or Simplex(system, unit_bounds=True)
    if not lp.feasible:
        raise NotFeasible("variable support of an infeasible system")
    support = lp.support()
    while len(support) < system.ncols:
        c = [0 if j in support else 1 for j in range(system.ncols)]
        value, x = lp.maximize(c)
        if value == 0:
            break
        support |= {j for j, v in enumerate(x) if v > 0}
    return frozenset(support)


def variable_support_by_columns(system: LinearSystem) -> frozenset[int]:
    """Reference version: one maximisation per column."""
    lp = Simplex(system, unit_bounds=True)
    if not lp.feasible:
        raise NotFeasible("variable support of an infeasible system")
    out = set()
    for j in range(system.ncols):
        c = [0] * system.ncols
        c[j] = 1
        value, _ = lp.maximize(c)
        if value > 0:
            out.add(j)
    return frozenset(out)
