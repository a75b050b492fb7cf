"""Integer solutions of ``Mx = c`` via column Hermite normal form.

``M U = H`` with ``U`` unimodular and ``H`` in column echelon form. Writing
``x = U z`` turns the system into a triangular one that is solved top to
bottom. When it fails, the failing row yields a rational ``y`` with ``y^T M``
integral and ``y^T c`` not integral, which proves no integer solution exists.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .program import LinearSystem, Rational


@dataclass(frozen=True)
class IntegerCertificate:
    y: tuple[Fraction, ...]

    def verify(self, system: LinearSystem) -> bool:
        return verify_certificate(system, self.y)


def verify_certificate(system: LinearSystem, y: Sequence[Rational]) -> bool:
    if len(y) != system.nrows:
        return False
    for j in range(system.ncols):
        if Fraction(sum(yi * row[j] for yi, row in zip(y, system.rows) if yi)).denominator != 1:
            return False
    return Fraction(sum(yi * b for yi, b in zip(y, system.rhs))).denominator != 1


@dataclass
class HermiteForm:
    h: list[list[int]]          # rows x cols
    u: list[list[int]]          # cols x cols, unimodular
    pivots: list[int]           # pivots[t] = row of the t-th pivot (column t)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hermite_form(m: Sequence[Sequence[int]], ncols: int) -> HermiteForm:
    h = [list(map(int, row)) for row in m]
    u = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    rows = len(h)

    def combine(j: int, k: int, a: int, b: int, c: int, d: int) -> None:
        # (col_j, col_k) <- (a col_j + b col_k, c col_j + d col_k)
        for mat in (h, u):
            for row in mat:
                x, y = row[j], row[k]
                if x or y:
                    row[j], row[k] = a * x + b * y, c * x + d * y

    pivots: list[int] = []
    t = 0
    for i in range(rows):
        if t == ncols:
            break
        for k in range(t + 1, ncols):
            b = h[i][k]
            if not b:
                continue
            a = h[i][t]
            g, p, q = _ext_gcd(a, b)
            # [a b] [[p, -b/g], [q, a/g]] = [g 0], determinant 1
            combine(t, k, p, q, -b // g, a // g)
        if h[i][t] == 0:
            continue
        if h[i][t] < 0:
            for mat in (h, u):
                for row in mat:
                    row[t] = -row[t]
        piv = h[i][t]
        for s in range(t):
            q = h[i][s] // piv
            if q:
                combine(s, t, 1, -q, 0, 1)
        pivots.append(i)
        t += 1
    return HermiteForm(h, u, pivots)


def _solve_upper(l_rows, target_len: int, rhs_row) -> list[Fraction]:
    """Solve ``w^T L = rhs_row`` for lower-triangular ``L`` (pivot rows x pivot cols)."""
    k = target_len
    w = [Fraction(0)] * k
    for t in reversed(range(k)):
        acc = Fraction(rhs_row[t]) - sum(w[s] * l_rows[s][t] for s in range(t + 1, k))
        w[t] = acc / l_rows[t][t]
    return w


def aip_solve(system: LinearSystem) -> tuple[int, ...] | IntegerCertificate:
    """An integer point of ``Mx = c`` or a certificate that none exists."""
    scales = []
    m_int, c_int = [], []
    for row, b in zip(system.rows, system.rhs):
        if type(b) is int and all(type(v) is int for v in row):
            scales.append(1)
            m_int.append(list(row))
            c_int.append(b)
            continue
        den = lcm(*(Fraction(v).denominator for v in row), Fraction(b).denominator)
        scales.append(den)
        m_int.append([int(Fraction(v) * den) for v in row])
        c_int.append(int(Fraction(b) * den))
    n = system.ncols
    hf = hermite_form(m_int, n)
    h, pivots = hf.h, hf.pivots
    z: list[int] = []
    is_pivot = {r: t for t, r in enumerate(pivots)}

    def certificate(y_int: dict[int, Fraction]) -> IntegerCertificate:
        y = [Fraction(0)] * system.nrows
        for r, v in y_int.items():
            y[r] = v * scales[r]
        return IntegerCertificate(tuple(y))

    for i in range(system.nrows):
        done = len(z)
        row = h[i]
        value = sum(row[s] * z[s] for s in range(done) if row[s])
        if i in is_pivot:
            t = is_pivot[i]
            zt, rem = divmod(c_int[i] - value, row[t])
            if rem:
                l_rows = [[h[r][s] for s in range(t + 1)] for r in pivots[: t + 1]]
                w = _solve_upper(l_rows, t + 1, [0] * t + [1])
                return certificate({pivots[s]: w[s] for s in range(t + 1)})
            z.append(zt)
        elif value != c_int[i]:
            delta = c_int[i] - value
            l_rows = [[h[r][s] for s in range(done)] for r in pivots[:done]]
            w = _solve_upper(l_rows, done, row[:done])
            y = {pivots[s]: -w[s] for s in range(done)}
            y[i] = Fraction(1)
            scale = Fraction(1, 2 * delta)
            return certificate({r: v * scale for r, v in y.items()})
    z_full = z + [0] * (n - len(z))
    return tuple(sum(u_row[t] * z_full[t] for t in range(len(z)) if z_full[t]) for u_row in hf.u)
