"""The BLP / AIP equation system of an instance over a template."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from ..errors import SignatureMismatch
from ..structures import Structure

Rational = Union[int, Fraction]

BLP = "BLP"
AIP = "AIP"


@dataclass(frozen=True)
class ProgramVariables:
    """Column layout: ``mu_v(a)`` first (by ``v`` then ``a``), then ``mu_{v,R}(a)``."""
    vertex: dict[tuple[int, int], int]
    constraint: dict[tuple[str, tuple[int, ...], tuple[int, ...]], int]

    @property
    def size(self) -> int:
        return len(self.vertex) + len(self.constraint)

    def label(self, col: int) -> str:
        for (v, a), c in self.vertex.items():
            if c == col:
                return f"mu_{v}({a})"
        for (r, vs, as_), c in self.constraint.items():
            if c == col:
                return f"mu_{vs},{r}({as_})"
        raise KeyError(col)


@dataclass(frozen=True)
class LinearSystem:
    """``rows @ x == rhs`` with either unit-interval bounds (BLP) or integrality (AIP)."""
    rows: tuple[tuple[Rational, ...], ...]
    rhs: tuple[Rational, ...]
    ncols: int
    kind: str = BLP

    def __post_init__(self):
        if len(self.rows) != len(self.rhs):
            raise ValueError("one right-hand side per row")
        if any(len(r) != self.ncols for r in self.rows):
            raise ValueError("row length differs from the column count")
        if self.kind not in (BLP, AIP):
            raise ValueError(f"unknown system kind {self.kind!r}")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def with_kind(self, kind: str) -> "LinearSystem":
        return LinearSystem(self.rows, self.rhs, self.ncols, kind)

    def satisfied_by(self, x: Sequence[Rational]) -> bool:
        if len(x) != self.ncols:
            return False
        if self.kind == BLP and any(not 0 <= v <= 1 for v in x):
            return False
        if self.kind == AIP and any(Fraction(v).denominator != 1 for v in x):
            return False
        return all(sum(c * v for c, v in zip(row, x) if c) == b for row, b in zip(self.rows, self.rhs))

    def restrict(self, keep: Sequence[int]) -> "LinearSystem":
        """Drop every column not in ``keep``; the same as forcing those columns to zero."""
        keep = list(keep)
        return LinearSystem(tuple(tuple(row[j] for j in keep) for row in self.rows), self.rhs, len(keep), self.kind)

    def dump(self) -> str:
        lines = []
        for row, b in zip(self.rows, self.rhs):
            lines.append(" ".join(str(Fraction(c)) for c in row) + " | " + str(Fraction(b)))
        return "\n".join(lines) + ("\n" if lines else "")


def parse_system(text: str, kind: str = AIP) -> LinearSystem:
    rows, rhs = [], []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "|" not in line:
            raise ValueError(f"missing '|' in system row {raw!r}")
        left, right = line.split("|")
        rows.append(tuple(Fraction(tok) for tok in left.split()))
        rhs.append(Fraction(right.strip()))
    ncols = len(rows[0]) if rows else 0
    return LinearSystem(tuple(rows), tuple(rhs), ncols, kind)


def build_program(a: Structure, i: Structure, kind: str = BLP) -> tuple[LinearSystem, ProgramVariables]:
    if not a.similar_to(i):
        raise SignatureMismatch(f"{i.name} is not an instance over the signature of {a.name}")
    vertex = {}
    for v in range(i.domain_size):
        for x in range(a.domain_size):
            vertex[(v, x)] = len(vertex)
    constraint = {}
    col = len(vertex)
    for (name, _, rel_i), rel_a in zip(i.items(), a.relations):
        for vs in rel_i:
            for as_ in rel_a:
                constraint[(name, vs, as_)] = col
                col += 1
    n = col
    rows: list[tuple[int, ...]] = []
    rhs: list[int] = []

    def emit(entries: dict[int, int], b: int) -> None:
        row = [0] * n
        for j, c in entries.items():
            row[j] += c
        rows.append(tuple(row))
        rhs.append(b)

    for v in range(i.domain_size):
        emit({vertex[(v, x)]: 1 for x in range(a.domain_size)}, 1)
    for (name, _, rel_i), rel_a in zip(i.items(), a.relations):
        for vs in rel_i:
            emit({constraint[(name, vs, as_)]: 1 for as_ in rel_a}, 1)
    for (name, k, rel_i), rel_a in zip(i.items(), a.relations):
        for vs in rel_i:
            for pos in range(k):
                for x in range(a.domain_size):
                    entries = {constraint[(name, vs, as_)]: 1 for as_ in rel_a if as_[pos] == x}
                    entries[vertex[(vs[pos], x)]] = entries.get(vertex[(vs[pos], x)], 0) - 1
                    emit(entries, 0)
    return LinearSystem(tuple(rows), tuple(rhs), n, kind), ProgramVariables(vertex, constraint)


def integral_point(h: Sequence[int], a: Structure, i: Structure, variables: ProgramVariables) -> tuple[int, ...]:
    """The 0/1 point encoding a homomorphism ``h: i -> a``."""
    x = [0] * variables.size
    for v, img in enumerate(h):
        x[variables.vertex[(v, img)]] = 1
    for (name, vs, as_), col in variables.constraint.items():
        if tuple(h[v] for v in vs) == as_:
            x[col] = 1
    return tuple(x)
