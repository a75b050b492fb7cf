"""Brute-force reference implementations, independent of the library's search code."""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from pcsplab.structures import Structure


def maps_preserving(src: Structure, dst: Structure):
    """Every homomorphism src -> dst by trying all |dst|^|src| maps."""
    for h in itertools.product(range(dst.domain_size), repeat=src.domain_size):
        if all(tuple(h[x] for x in t) in set(rd)
               for rs, rd in zip(src.relations, dst.relations) for t in rs):
            yield h


def brute_hom_exists(src: Structure, dst: Structure) -> bool:
    return next(maps_preserving(src, dst), None) is not None


def brute_homs(src: Structure, dst: Structure) -> list[tuple[int, ...]]:
    return sorted(maps_preserving(src, dst))


def brute_isomorphic(a: Structure, b: Structure) -> bool:
    if a.domain_size != b.domain_size or a.signature != b.signature:
        return False
    target = [set(r) for r in b.relations]
    for p in itertools.permutations(range(a.domain_size)):
        if all({tuple(p[x] for x in t) for t in ra} == rb for ra, rb in zip(a.relations, target)):
            return True
    return False


def solve_rational(rows, rhs):
    """Unique solution of a square-or-taller system by Gauss-Jordan, or None."""
    m = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    n = len(rows[0]) if rows else 0
    r = 0
    piv_cols = []
    for c in range(n):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    if any(all(v == 0 for v in row[:-1]) and row[-1] != 0 for row in m):
        return "inconsistent"
    if len(piv_cols) < n:
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        x[c] = m[i][-1]
    return x


def polytope_vertices(rows, rhs, n):
    """Vertices of {Mx = c, 0 <= x <= 1}: fix every column to 0, 1 or free, solve uniquely."""
    out = set()
    for pattern in itertools.product((0, 1, None), repeat=n):
        extra_rows, extra_rhs = [], []
        for j, v in enumerate(pattern):
            if v is not None:
                e = [0] * n
                e[j] = 1
                extra_rows.append(e)
                extra_rhs.append(v)
        x = solve_rational(list(rows) + extra_rows, list(rhs) + extra_rhs)
        if isinstance(x, list) and all(0 <= v <= 1 for v in x):
            out.add(tuple(x))
    return out


def brute_support(rows, rhs, n) -> frozenset[int] | None:
    verts = polytope_vertices(rows, rhs, n)
    if not verts:
        return None
    return frozenset(j for v in verts for j in range(n) if v[j] > 0)


def box_solution_exists(rows, rhs, bound: int = 50) -> bool:
    """Integer x with |x_j| <= bound and Mx = c, by meeting in the middle."""
    m = np.array(rows, dtype=np.int64).reshape(len(rows), -1)
    c = np.array(rhs, dtype=np.int64)
    n = m.shape[1]
    if n == 0:
        return bool(np.all(c == 0))
    half = n // 2
    vals = np.arange(-bound, bound + 1, dtype=np.int64)

    def sums(cols):
        if not cols:
            return np.zeros((1, m.shape[0]), dtype=np.int64)
        grids = np.meshgrid(*([vals] * len(cols)), indexing="ij")
        xs = np.stack([g.ravel() for g in grids], axis=1)
        return xs @ m[:, cols].T

    left = sums(list(range(half)))
    right = c - sums(list(range(half, n)))
    seen = {row.tobytes() for row in np.unique(left, axis=0)}
    return any(row.tobytes() in seen for row in np.unique(right, axis=0))


def multiset_instance_classes(max_vertices: int = 5, max_tuples: int = 6):
    """Representatives of ternary instances up to vertex renaming and tuple reordering.

    Each constraint is a multiset of three vertices, written as a sorted tuple.
    Instances are grown one constraint at a time and deduplicated by a canonical
    bitmask over all vertex permutations.
    """
    multisets = list(itertools.combinations_with_replacement(range(max_vertices), 3))
    index = {t: n for n, t in enumerate(multisets)}
    perms = list(itertools.permutations(range(max_vertices)))
    image = np.array([[index[tuple(sorted(p[x] for x in t))] for t in multisets] for p in perms],
                     dtype=np.int64)
    weights = np.left_shift(np.int64(1), np.arange(len(multisets), dtype=np.int64))

    def canon(members: tuple[int, ...]) -> int:
        return int(weights[image[:, list(members)]].sum(axis=1).min())

    level = {0: ()}
    classes = [()]
    for _ in range(max_tuples):
        nxt = {}
        for members in level.values():
            for j in range(len(multisets)):
                if j in members:
                    continue
                grown = tuple(sorted(members + (j,)))
                key = canon(grown)
                if key not in nxt:
                    nxt[key] = grown
        level = nxt
        classes.extend(level.values())
    return [[multisets[j] for j in members] for members in classes]
