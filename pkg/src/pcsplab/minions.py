"""Polymorphism minions at bounded arity.

Coordinates are 1-based throughout this module (a minor map ``pi`` sends
``1..m`` to ``1..n``, essential coordinates and selections use ``1..n``),
matching the usual ``[n] = {1, ..., n}`` convention. Function tables are
indexed exactly like :func:`pcsplab.structures.power`, so the table of a
polymorphism is literally a homomorphism ``A^n -> B``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .config import Budget
from .errors import (ArityMismatch, MalformedSelection, MissingArity, ParseError,
                     WrongTemplate)
from .homs import count_homomorphisms, enumerate_homomorphisms, find_homomorphism
from .structures import Structure, decode, encode, is_homomorphism, power


class ArityWindowMismatch(ValueError):
    pass


# --------------------------------------------------------------------------
# tables and minor maps

@dataclass(frozen=True)
class FunctionTable:
    arity: int
    source_size: int
    target_size: int
    values: tuple[int, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if len(self.values) != self.source_size ** self.arity:
            raise ValueError("table length must be source_size ** arity")
        if any(not 0 <= v < self.target_size for v in self.values):
            raise ValueError("table value out of range")

    @classmethod
    def from_callable(cls, fn, arity: int, source_size: int, target_size: int) -> "FunctionTable":
        vals = tuple(int(fn(*args)) for args in itertools.product(range(source_size), repeat=arity))
        return cls(arity, source_size, target_size, vals)

    def __call__(self, *args: int) -> int:
        return self.values[encode(args, self.source_size)]

    def __lt__(self, other: "FunctionTable") -> bool:
        return self.sort_key < other.sort_key

    @property
    def sort_key(self):
        return (self.arity, self.values)

    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int64).reshape((self.source_size,) * self.arity)

    def is_polymorphism(self, a: Structure, b: Structure) -> bool:
        if self.source_size != a.domain_size or self.target_size != b.domain_size:
            return False
        return is_homomorphism(self.values, power(a, self.arity), b)

    def __repr__(self):
        return f"FunctionTable(arity={self.arity}, {self.source_size}->{self.target_size}, {self.values})"


def projection(arity: int, coordinate: int, domain_size: int) -> FunctionTable:
    return FunctionTable.from_callable(lambda *x: x[coordinate - 1], arity, domain_size, domain_size)


@dataclass(frozen=True)
class MinorMap:
    """``pi: [source_arity] -> [target_arity]``; ``minor(g, pi)(x) = g(x[pi(1)], ..., x[pi(m)])``."""
    source_arity: int
    target_arity: int
    pi: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "pi", tuple(int(p) for p in self.pi))
        if len(self.pi) != self.source_arity:
            raise ValueError("pi must have source_arity entries")
        if self.target_arity < 1 or any(not 1 <= p <= self.target_arity for p in self.pi):
            raise ValueError("pi entries must lie in 1..target_arity")

    @classmethod
    def of(cls, pi: Sequence[int], target_arity: int | None = None) -> "MinorMap":
        pi = tuple(pi)
        return cls(len(pi), target_arity if target_arity is not None else max(pi), pi)

    @classmethod
    def identity(cls, n: int) -> "MinorMap":
        return cls(n, n, tuple(range(1, n + 1)))

    def __call__(self, i: int) -> int:
        return self.pi[i - 1]

    def then(self, other: "MinorMap") -> "MinorMap":
        """Map ``i -> other(self(i))``; ``minor(minor(g, self), other) == minor(g, self.then(other))``."""
        if other.source_arity != self.target_arity:
            raise ArityMismatch("cannot compose minor maps with mismatched arities")
        return MinorMap(self.source_arity, other.target_arity, tuple(other(p) for p in self.pi))

    def image(self, coords: Iterable[int]) -> frozenset[int]:
        return frozenset(self(i) for i in coords)

    def inverse(self) -> "MinorMap":
        if sorted(self.pi) != list(range(1, self.target_arity + 1)):
            raise ValueError("only permutations are invertible")
        inv = [0] * self.source_arity
        for i, p in enumerate(self.pi, start=1):
            inv[p - 1] = i
        return MinorMap(self.target_arity, self.source_arity, tuple(inv))


def all_minor_maps(m: int, n: int) -> Iterator[MinorMap]:
    for pi in itertools.product(range(1, n + 1), repeat=m):
        yield MinorMap(m, n, pi)


@lru_cache(maxsize=4096)
def _minor_index(size: int, m: int, n: int, pi: tuple[int, ...]) -> np.ndarray:
    """For each input of the minor (arity n), the index into the original table."""
    digits = np.indices((size,) * n).reshape(n, -1)
    weights = np.zeros(n, dtype=np.int64)
    for k, p in enumerate(pi):
        weights[p - 1] += size ** (m - 1 - k)
    return weights @ digits


def minor(g: FunctionTable, pi: MinorMap) -> FunctionTable:
    if pi.source_arity != g.arity:
        raise ArityMismatch(f"minor map from arity {pi.source_arity} applied to arity {g.arity}")
    idx = _minor_index(g.source_size, pi.source_arity, pi.target_arity, pi.pi)
    vals = np.asarray(g.values, dtype=np.int64)[idx]
    return FunctionTable(pi.target_arity, g.source_size, g.target_size, tuple(vals.tolist()))


# --------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class TableClass:
    symmetric: bool
    parity_symmetric: bool
    cancellation: bool
    alternating: bool
    essential_coords: frozenset[int]


def _invariant_under_swap(arr: np.ndarray, i: int, j: int) -> bool:
    return bool(np.array_equal(arr, np.swapaxes(arr, i, j)))


def essential_coordinates(f: FunctionTable) -> frozenset[int]:
    arr = f.array()
    out = set()
    for i in range(f.arity):
        first = np.take(arr, [0], axis=i)
        if not np.array_equal(arr, np.broadcast_to(first, arr.shape)):
            out.add(i + 1)
    return frozenset(out)


def is_symmetric(f: FunctionTable) -> bool:
    arr = f.array()
    return all(_invariant_under_swap(arr, i, i + 1) for i in range(f.arity - 1))


def is_parity_symmetric(f: FunctionTable) -> bool:
    if f.arity % 2 == 0:
        return False
    arr = f.array()
    # 0-based even axes are the odd positions 1, 3, 5, ...
    for start in (0, 1):
        axes = list(range(start, f.arity, 2))
        if not all(_invariant_under_swap(arr, a, b) for a, b in zip(axes, axes[1:])):
            return False
    return True


def has_cancellation(f: FunctionTable) -> bool:
    """``f(x_1..x_{2n-1}, y, y)`` does not depend on ``y``; vacuous for arity 1."""
    if f.arity % 2 == 0:
        return False
    if f.arity == 1:
        return True
    diag = np.diagonal(f.array(), axis1=-2, axis2=-1)
    return bool(np.all(diag == diag[..., :1]))


def classify_table(f: FunctionTable) -> TableClass:
    sym = is_symmetric(f)
    par = is_parity_symmetric(f)
    canc = has_cancellation(f)
    return TableClass(sym, par, canc, par and canc, essential_coordinates(f))


# --------------------------------------------------------------------------
# windows of minions

@dataclass
class MinionSlice:
    """A finite window of a function minion, keyed by arity."""
    by_arity: dict[int, tuple[FunctionTable, ...]]
    template: tuple[Structure, Structure] | None = None
    label: str = ""
    _index: dict[FunctionTable, int] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.by_arity = {n: tuple(sorted(set(ts))) for n, ts in sorted(self.by_arity.items())}
        for n, ts in self.by_arity.items():
            if any(t.arity != n for t in ts):
                raise ValueError(f"table filed under arity {n} has a different arity")

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(self.by_arity)

    def tables(self) -> list[FunctionTable]:
        return [t for n in self.by_arity for t in self.by_arity[n]]

    def __contains__(self, f: FunctionTable) -> bool:
        return f in self.by_arity.get(f.arity, ())

    def __len__(self):
        return sum(len(ts) for ts in self.by_arity.values())

    def at(self, n: int) -> tuple[FunctionTable, ...]:
        if n not in self.by_arity:
            raise MissingArity(f"window does not cover arity {n}")
        return self.by_arity[n]

    def minor_closed(self) -> bool:
        for f in self.tables():
            for n in self.arities:
                for pi in all_minor_maps(f.arity, n):
                    if minor(f, pi) not in self:
                        return False
        return True


def enumerate_polymorphisms(a: Structure, b: Structure, n: int, budget: Budget | None = None) -> MinionSlice:
    return polymorphism_slice(a, b, (n,), budget)


def polymorphism_slice(a: Structure, b: Structure, arities: Iterable[int],
                       budget: Budget | None = None) -> MinionSlice:
    by_arity = {}
    for n in arities:
        homs = enumerate_homomorphisms(power(a, n, budget), b, budget)
        by_arity[n] = tuple(FunctionTable(n, a.domain_size, b.domain_size, h) for h in homs)
    return MinionSlice(by_arity, (a, b), f"Pol({a.name},{b.name})")


def count_polymorphisms(a: Structure, b: Structure, n: int, budget: Budget | None = None) -> int:
    return count_homomorphisms(power(a, n, budget), b, budget)


def projection_slice(domain_size: int, arities: Iterable[int]) -> MinionSlice:
    by_arity = {n: tuple(projection(n, i, domain_size) for i in range(1, n + 1)) for n in arities}
    return MinionSlice(by_arity, None, f"P{domain_size}")


def minor_closure(generators: Iterable[FunctionTable], arities: Iterable[int]) -> MinionSlice:
    """All minors of ``generators`` landing in ``arities``: the smallest closed window."""
    arities = sorted(set(arities))
    by_arity: dict[int, set[FunctionTable]] = {n: set() for n in arities}
    for g in generators:
        for n in arities:
            for pi in all_minor_maps(g.arity, n):
                by_arity[n].add(minor(g, pi))
    return MinionSlice({n: tuple(ts) for n, ts in by_arity.items()}, None, "closure")


class Pol:
    """Lazily enumerated polymorphism minion of a template, cached per arity."""

    def __init__(self, a: Structure, b: Structure, budget: Budget | None = None):
        if not a.similar_to(b):
            raise ValueError("template structures are not similar")
        self.a, self.b, self.budget = a, b, budget
        self._cache: dict[int, tuple[FunctionTable, ...]] = {}

    def elements(self, n: int) -> tuple[FunctionTable, ...]:
        if n not in self._cache:
            self._cache[n] = enumerate_polymorphisms(self.a, self.b, n, self.budget).at(n)
        return self._cache[n]

    def minor(self, f: FunctionTable, pi: MinorMap) -> FunctionTable:
        return minor(f, pi)

    def count(self, n: int) -> int:
        if n in self._cache:
            return len(self._cache[n])
        return count_polymorphisms(self.a, self.b, n, self.budget)

    def slice(self, arities: Iterable[int]) -> MinionSlice:
        return MinionSlice({n: self.elements(n) for n in arities}, (self.a, self.b),
                           f"Pol({self.a.name},{self.b.name})")


@dataclass(frozen=True, order=True)
class Projection:
    """Symbolic projection ``x -> x_coordinate``; used where tables would be huge."""
    arity: int
    coordinate: int

    def table(self, domain_size: int = 2) -> FunctionTable:
        return projection(self.arity, self.coordinate, domain_size)


class Projections:
    """The projection minion; ``Pol`` of the 3-SAT template, generated directly."""

    def __init__(self, domain_size: int = 2):
        self.domain_size = domain_size

    def elements(self, n: int) -> tuple[Projection, ...]:
        return tuple(Projection(n, i) for i in range(1, n + 1))

    def minor(self, p: Projection, pi: MinorMap) -> Projection:
        if pi.source_arity != p.arity:
            raise ArityMismatch("minor map does not match projection arity")
        return Projection(pi.target_arity, pi(p.coordinate))

    def count(self, n: int) -> int:
        return n

    def slice(self, arities: Iterable[int]) -> MinionSlice:
        return projection_slice(self.domain_size, arities)


# --------------------------------------------------------------------------
# minor conditions

@dataclass(frozen=True)
class Identity:
    lhs: str
    lhs_args: tuple[str, ...]
    rhs: str
    rhs_args: tuple[str, ...]

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.lhs_args + self.rhs_args))

    def __str__(self):
        return f"{self.lhs}({','.join(self.lhs_args)}) = {self.rhs}({','.join(self.rhs_args)})"


@dataclass(frozen=True)
class MinorCondition:
    symbols: tuple[tuple[str, int], ...]
    identities: tuple[Identity, ...]

    def __post_init__(self):
        arity = {}
        for name, k in self.symbols:
            if name in arity:
                raise ValueError(f"duplicate function symbol {name}")
            if k < 1:
                raise ValueError(f"symbol {name} needs arity >= 1")
            arity[name] = k
        for ident in self.identities:
            for sym, args in ((ident.lhs, ident.lhs_args), (ident.rhs, ident.rhs_args)):
                if sym not in arity:
                    raise ValueError(f"undeclared function symbol {sym}")
                if len(args) != arity[sym]:
                    raise ArityMismatch(f"{sym} has arity {arity[sym]} but is applied to {len(args)} arguments")

    def arity(self, name: str) -> int:
        return dict(self.symbols)[name]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.symbols)

    def without(self, index: int) -> "MinorCondition":
        return MinorCondition(self.symbols, self.identities[:index] + self.identities[index + 1:])

    def __str__(self):
        head = "symbols: " + ", ".join(f"{n}/{k}" for n, k in self.symbols) + ";"
        return "\n".join([head] + [f"{ident};" for ident in self.identities]) + "\n"


_TERM = re.compile(r"\s*([A-Za-z_]\w*)\s*\(([^()]*)\)\s*\Z")


def parse_condition(text: str) -> MinorCondition:
    """Parse ``symbols: n/3, s/2; n(x,x,y) = s(x,y); ...`` (``#`` comments allowed)."""
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    parts = [p.strip() for p in text.split(";") if p.strip()]
    if not parts or not parts[0].startswith("symbols"):
        raise ParseError("condition must start with 'symbols:'")
    head = parts[0][len("symbols"):].strip()
    if not head.startswith(":"):
        raise ParseError("expected ':' after 'symbols'")
    symbols = []
    for item in head[1:].split(","):
        item = item.strip()
        if not item:
            continue
        m = re.fullmatch(r"([A-Za-z_]\w*)\s*/\s*(\d+)", item)
        if not m:
            raise ParseError(f"bad symbol declaration {item!r}")
        symbols.append((m.group(1), int(m.group(2))))
    identities = []
    for part in parts[1:]:
        if part.count("=") != 1:
            raise ParseError(f"identity must contain exactly one '=': {part!r}")
        left, right = part.split("=")
        terms = []
        for side in (left, right):
            m = _TERM.match(side)
            if not m:
                raise ParseError(f"bad term {side.strip()!r}")
            args = tuple(a.strip() for a in m.group(2).split(",")) if m.group(2).strip() else ()
            if any(not re.fullmatch(r"[A-Za-z_]\w*", a) for a in args):
                raise ParseError(f"bad variable list in {side.strip()!r}")
            terms.append((m.group(1), args))
        identities.append(Identity(terms[0][0], terms[0][1], terms[1][0], terms[1][1]))
    try:
        return MinorCondition(tuple(symbols), tuple(identities))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def wnu3() -> MinorCondition:
    return parse_condition("symbols: n/3, s/2; n(x,x,y) = s(x,y); n(x,y,x) = s(x,y); n(y,x,x) = s(x,y);")


def _identity_pairs(ident: Identity, domain_size: int) -> tuple[np.ndarray, np.ndarray]:
    vars_ = ident.variables
    pos = {v: i for i, v in enumerate(vars_)}
    assignments = np.indices((domain_size,) * len(vars_)).reshape(len(vars_), -1)

    def index(args):
        out = np.zeros(assignments.shape[1], dtype=np.int64)
        for a in args:
            out = out * domain_size + assignments[pos[a]]
        return out

    return index(ident.lhs_args), index(ident.rhs_args)


def satisfies(cond: MinorCondition, assignment: Mapping[str, FunctionTable]) -> bool:
    """Do the given tables make every identity an equality of functions?"""
    for name, k in cond.symbols:
        if assignment[name].arity != k:
            return False
    for ident in cond.identities:
        f, g = assignment[ident.lhs], assignment[ident.rhs]
        li, ri = _identity_pairs(ident, f.source_size)
        if not np.array_equal(np.asarray(f.values)[li], np.asarray(g.values)[ri]):
            return False
    return True


def check_condition(cond: MinorCondition, window: MinionSlice) -> dict[str, FunctionTable] | None:
    """First satisfying assignment symbol -> table in canonical order, exhaustively."""
    for name, k in cond.symbols:
        window.at(k)
    names = cond.names
    order = {n: i for i, n in enumerate(names)}
    size = next((t.source_size for t in window.tables()), 0)
    checks = [[] for _ in names]
    for ident in cond.identities:
        li, ri = _identity_pairs(ident, size)
        last = max(order[ident.lhs], order[ident.rhs])
        checks[last].append((ident.lhs, li, ident.rhs, ri))
    arrays: dict[str, np.ndarray] = {}
    chosen: dict[str, FunctionTable] = {}

    def extend(depth: int) -> bool:
        if depth == len(names):
            return True
        name = names[depth]
        for t in window.at(cond.arity(name)):
            chosen[name] = t
            arrays[name] = np.asarray(t.values)
            if all(np.array_equal(arrays[l][li], arrays[r][ri]) for l, li, r, ri in checks[depth]):
                if extend(depth + 1):
                    return True
        chosen.pop(name, None)
        return False

    return dict(chosen) if extend(0) else None


def condition_instance(cond: MinorCondition, a: Structure,
                       budget: Budget | None = None) -> tuple[Structure, list[tuple[str, int, int]]]:
    """Compile a condition over ``Pol(a, -)`` into a CSP instance.

    Returns the instance and, per symbol, ``(name, offset, length)`` describing
    where its table lives before merging; ``classes`` maps raw cells to
    instance elements via the second return element's ``cell_class`` list.
    """
    layout = []
    offset = 0
    parts = []
    for name, k in cond.symbols:
        p = power(a, k, budget)
        layout.append((name, offset, p.domain_size))
        parts.append((offset, p))
        offset += p.domain_size
    parent = list(range(offset))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    where = {name: off for name, off, _ in layout}
    for ident in cond.identities:
        li, ri = _identity_pairs(ident, a.domain_size)
        for x, y in zip(li.tolist(), ri.tolist()):
            rx, ry = find(where[ident.lhs] + x), find(where[ident.rhs] + y)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)
    reps = sorted({find(x) for x in range(offset)})
    renum = {r: i for i, r in enumerate(reps)}
    cell_class = [renum[find(x)] for x in range(offset)]
    rels = [set() for _ in a.signature]
    for off, p in parts:
        for r, rel in enumerate(p.relations):
            rels[r].update(tuple(cell_class[off + x] for x in t) for t in rel)
    inst = Structure(f"cond_{a.name}", len(reps), a.signature, tuple(tuple(sorted(r)) for r in rels))
    return inst, [(name, off, length, cell_class) for name, off, length in layout]


def solve_condition(cond: MinorCondition, a: Structure, b: Structure,
                    budget: Budget | None = None) -> dict[str, FunctionTable] | None:
    """Canonically first witness of ``cond`` in ``Pol(a, b)``, without materialising slices.

    The witness equals what :func:`check_condition` returns on the full slice:
    cell classes are numbered by their first raw cell, so the least homomorphism
    is the least concatenation of tables in symbol order.
    """
    inst, layout = condition_instance(cond, a, budget)
    h = find_homomorphism(inst, b, budget)
    if h is None:
        return None
    out = {}
    for name, off, length, cell_class in layout:
        vals = tuple(h[cell_class[off + x]] for x in range(length))
        out[name] = FunctionTable(cond.arity(name), a.domain_size, b.domain_size, vals)
    return out


def is_trivial_condition(cond: MinorCondition) -> bool:
    """Satisfiable by projections: pick one coordinate per symbol."""
    return trivial_witness(cond) is not None


def trivial_witness(cond: MinorCondition) -> dict[str, int] | None:
    names = cond.names
    for choice in itertools.product(*(range(1, k + 1) for _, k in cond.symbols)):
        pick = dict(zip(names, choice))
        if all(ident.lhs_args[pick[ident.lhs] - 1] == ident.rhs_args[pick[ident.rhs] - 1]
               for ident in cond.identities):
            return pick
    return None


# --------------------------------------------------------------------------
# minion homomorphisms on windows

@dataclass(frozen=True)
class WindowHomomorphism:
    """A minor-preserving map between two finite windows.

    This is bounded evidence only: it says nothing about arities outside the
    window, so it never certifies a minion homomorphism.
    """
    mapping: Mapping[FunctionTable, FunctionTable]
    arities: tuple[int, ...]
    evidence: str = "bounded"

    def __getitem__(self, f: FunctionTable) -> FunctionTable:
        return self.mapping[f]


def is_window_homomorphism(mapping: Mapping[FunctionTable, FunctionTable],
                           frm: MinionSlice, to: MinionSlice) -> bool:
    for f in frm.tables():
        if f not in mapping or mapping[f].arity != f.arity or mapping[f] not in to:
            return False
    for g in frm.tables():
        for n in frm.arities:
            for pi in all_minor_maps(g.arity, n):
                h = minor(g, pi)
                if h not in mapping or minor(mapping[g], pi) != mapping[h]:
                    return False
    return True


def search_minion_homomorphism(frm: MinionSlice, to: MinionSlice) -> WindowHomomorphism | None:
    """Backtracking search for a minor-preserving, arity-preserving map on a window."""
    if frm.arities != to.arities:
        raise ArityWindowMismatch(f"windows cover arities {frm.arities} and {to.arities}")
    arities = frm.arities
    src = frm.tables()
    dst = to.tables()
    s_idx = {t: i for i, t in enumerate(src)}
    d_idx = {t: i for i, t in enumerate(dst)}
    maps = {(m, n): list(all_minor_maps(m, n)) for m in arities for n in arities}

    out_edges: list[list[tuple[int, int]]] = []  # per source table: (map id, minor index)
    in_edges: list[list[tuple[int, int]]] = [[] for _ in src]
    map_ids: dict[MinorMap, int] = {}
    for i, g in enumerate(src):
        edges = []
        for n in arities:
            for pi in maps[(g.arity, n)]:
                h = minor(g, pi)
                j = s_idx.get(h)
                if j is None:
                    raise ValueError("source window is not closed under minors")
                mid = map_ids.setdefault(pi, len(map_ids))
                edges.append((mid, j))
                in_edges[j].append((i, mid))
        out_edges.append(edges)
    id_to_map = {v: k for k, v in map_ids.items()}
    # d_minor[u][mid] = index of minor(dst[u], pi) in the target window, or None
    d_minor = []
    for u in dst:
        row = {}
        for mid, pi in id_to_map.items():
            if pi.source_arity == u.arity:
                row[mid] = d_idx.get(minor(u, pi))
        d_minor.append(row)

    domains = []
    for g in src:
        cands = []
        for u_i, u in enumerate(dst):
            if u.arity == g.arity and all(d_minor[u_i][mid] is not None for mid, _ in out_edges[s_idx[g]]):
                cands.append(u_i)
        domains.append(cands)

    assign = [-1] * len(src)

    def place(i: int, u: int, doms: list[list[int]], trail: list[int]) -> bool:
        stack = [(i, u)]
        while stack:
            i, u = stack.pop()
            if assign[i] != -1:
                if assign[i] != u:
                    return False
                continue
            if u not in doms[i]:
                return False
            assign[i] = u
            trail.append(i)
            for mid, j in out_edges[i]:
                stack.append((j, d_minor[u][mid]))
            for k, mid in in_edges[i]:
                if assign[k] == -1:
                    filtered = [w for w in doms[k] if d_minor[w][mid] == u]
                    if not filtered:
                        return False
                    doms[k] = filtered
        return True

    def search(doms: list[list[int]]) -> bool:
        try:
            i = assign.index(-1)
        except ValueError:
            return True
        for u in doms[i]:
            trail: list[int] = []
            child = list(doms)
            if place(i, u, child, trail) and search(child):
                return True
            for k in trail:
                assign[k] = -1
        return False

    if not search(domains):
        return None
    mapping = {g: dst[assign[i]] for i, g in enumerate(src)}
    return WindowHomomorphism(mapping, arities)


# --------------------------------------------------------------------------
# trash colours for Pol(K3, K4)

@dataclass(frozen=True)
class TrashRepresentation:
    trash: int
    coordinate: int
    alpha: tuple[int, int, int]
    unique_coordinate: bool


def _trash_triples(f: FunctionTable) -> Iterator[tuple[int, int, tuple[int, ...]]]:
    for t in range(f.target_size):
        for i in range(1, f.arity + 1):
            alpha: list[int | None] = [None] * f.source_size
            ok = True
            for idx, val in enumerate(f.values):
                if val == t:
                    continue
                a_i = (idx // f.source_size ** (f.arity - i)) % f.source_size
                if alpha[a_i] is None:
                    alpha[a_i] = val
                elif alpha[a_i] != val:
                    ok = False
                    break
            if ok:
                yield t, i, tuple(0 if x is None else x for x in alpha)


def verify_trash_representation(f: FunctionTable) -> TrashRepresentation | None:
    """Find ``(t, i, alpha)`` with ``f(a) in {t, alpha(a_i)}`` for every input."""
    if f.source_size != 3 or f.target_size != 4:
        raise WrongTemplate("trash colours are defined for tables K3^n -> K4")
    triples = list(_trash_triples(f))
    if not triples:
        return None
    t, i, alpha = triples[0]
    return TrashRepresentation(t, i, alpha, len({c for _, c, _ in triples}) == 1)


# --------------------------------------------------------------------------
# chains of minors and selections

@dataclass(frozen=True)
class ChainOfMinors:
    tables: tuple[FunctionTable, ...]
    maps: tuple[MinorMap, ...]

    def __post_init__(self):
        if len(self.maps) != len(self.tables) - 1:
            raise ValueError("a chain of length r has r consecutive minor maps")
        for t, pi, nxt in zip(self.tables, self.maps, self.tables[1:]):
            if minor(t, pi) != nxt:
                raise ValueError("consecutive chain tables are not related by the given minor map")

    @classmethod
    def iterate(cls, t0: FunctionTable, pi: MinorMap, r: int) -> "ChainOfMinors":
        tables = [t0]
        for _ in range(r):
            tables.append(minor(tables[-1], pi))
        return cls(tuple(tables), (pi,) * r)

    @property
    def length(self) -> int:
        return len(self.maps)

    def composite(self, i: int, j: int) -> MinorMap:
        """The map ``pi_{i,j}`` with ``tables[j] == minor(tables[i], pi_{i,j})``."""
        if not 0 <= i < j <= self.length:
            raise ValueError("need 0 <= i < j <= r")
        out = self.maps[i]
        for k in range(i + 1, j):
            out = out.then(self.maps[k])
        return out


Selection = Mapping[FunctionTable, frozenset[int]]


def _check_selection(tables: Iterable[FunctionTable], sel: Selection, d: int) -> None:
    for t in tables:
        if t not in sel:
            raise MalformedSelection("selection is undefined on a chain table")
        chosen = sel[t]
        if not 1 <= len(chosen) <= d:
            raise MalformedSelection(f"selection sizes must lie in [1, {d}]")
        if any(not 1 <= c <= t.arity for c in chosen):
            raise MalformedSelection("selected coordinate outside the arity")


def check_chain_selection(chain: ChainOfMinors, sel: Selection, d: int) -> bool:
    """Is there ``i < j`` with ``sel(t_j)`` meeting ``pi_{i,j}(sel(t_i))``?"""
    _check_selection(chain.tables, sel, d)
    for j in range(1, chain.length + 1):
        for i in range(j):
            if sel[chain.tables[j]] & chain.composite(i, j).image(sel[chain.tables[i]]):
                return True
    return False


def candidate_selections(tables: Iterable[FunctionTable], d: int) -> Iterator[dict[FunctionTable, frozenset[int]]]:
    distinct = sorted(set(tables))
    options = []
    for t in distinct:
        opts = [frozenset(c) for size in range(1, min(d, t.arity) + 1)
                for c in itertools.combinations(range(1, t.arity + 1), size)]
        options.append(opts)
    for choice in itertools.product(*options):
        yield dict(zip(distinct, choice))


def find_selection(chains: Sequence[ChainOfMinors], d: int) -> dict[FunctionTable, frozenset[int]] | None:
    """Exhaust selections on the tables of ``chains``; return one passing every chain."""
    tables = [t for c in chains for t in c.tables]
    for sel in candidate_selections(tables, d):
        if all(check_chain_selection(c, sel, d) for c in chains):
            return sel
    return None


def essential_selection(tables: Iterable[FunctionTable]) -> dict[FunctionTable, frozenset[int]]:
    return {t: essential_coordinates(t) for t in tables}


# --------------------------------------------------------------------------
# free structures

def free_structure(minion, generator: Structure, budget: Budget | None = None) -> Structure:
    """Free structure of a minion generated by ``generator``.

    ``minion`` is a :class:`Pol`, :class:`Projections`, or a template pair
    ``(A, B)``. Elements are the minion's members of arity ``|generator|`` in
    canonical order; a tuple ``(f_1..f_k)`` lies in ``R`` when some member
    ``g`` of arity ``|R^generator|`` has ``f_t = g^{pi_t}``, where ``pi_t``
    sends the position of each generator tuple to its ``t``-th entry.
    """
    if isinstance(minion, tuple):
        minion = Pol(minion[0], minion[1], budget)
    n = generator.domain_size
    if n < 1:
        raise ValueError("generator needs a non-empty domain")
    elements = minion.elements(n)
    index = {e: i for i, e in enumerate(elements)}
    rels = []
    for name, k, rel in generator.items():
        m = len(rel)
        tuples = set()
        if m:
            coord_maps = [MinorMap(m, n, tuple(t[pos] + 1 for t in rel)) for pos in range(k)]
            for g in minion.elements(m):
                tuples.add(tuple(index[minion.minor(g, pi)] for pi in coord_maps))
        rels.append(tuple(sorted(tuples)))
    return Structure(f"F_{generator.name}", len(elements), generator.signature, tuple(rels))


def free_structure_evaluation(minion_elements: Sequence[FunctionTable], point: Sequence[int]) -> tuple[int, ...]:
    """Evaluate every element at ``point``; at ``(0, 1, ..., n-1)`` this maps ``F -> B``."""
    return tuple(f(*point) for f in minion_elements)
