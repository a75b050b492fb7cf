"""Instance-side constructions: gadget replacement, pp-powers, arc graphs, k-reduction."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .config import Budget, default_budget
from .errors import BudgetExceeded, MalformedGadget, ParseError, SignatureMismatch
from .homs import enumerate_homomorphisms, homomorphism_exists
from .structures import (Signature, Structure, Tokens, induced_substructure, is_homomorphism,
                         read_structure, serialize_structure, x_power)


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # keep the smaller index as representative
            if rx < ry:
                self.parent[ry] = rx
            else:
                self.parent[rx] = ry

    def classes(self) -> list[int]:
        """Class number of every element, classes ordered by smallest member."""
        renum: dict[int, int] = {}
        out = []
        for x in range(len(self.parent)):
            r = self.find(x)
            if r not in renum:
                renum[r] = len(renum)
            out.append(renum[r])
        return out


def quotient(name: str, signature: Signature, size: int, raw: Sequence[Sequence[tuple[int, ...]]],
             uf: UnionFind) -> tuple[Structure, list[int]]:
    cls = uf.classes()
    count = max(cls) + 1 if cls else 0
    rels = tuple(tuple(sorted({tuple(cls[x] for x in t) for t in rel})) for rel in raw)
    return Structure(name, count, signature, rels), cls


# --------------------------------------------------------------------------
# gadgets

@dataclass(frozen=True)
class GadgetData:
    source: Signature
    variable: Structure
    constraints: Mapping[str, Structure]
    embeddings: Mapping[tuple[str, int], tuple[int, ...]]  # (R, i) with i in 1..ar(R)

    def __post_init__(self):
        problem = gadget_problem(self)
        if problem:
            raise MalformedGadget(problem)

    @property
    def target(self) -> Signature:
        return self.variable.signature


def gadget_problem(g: GadgetData) -> str | None:
    for name, k in g.source:
        if name not in g.constraints:
            return f"no constraint gadget for symbol {name}"
        gr = g.constraints[name]
        if not gr.similar_to(g.variable):
            return f"constraint gadget for {name} is not similar to the variable gadget"
        for i in range(1, k + 1):
            e = g.embeddings.get((name, i))
            if e is None:
                return f"missing embedding e {name} {i}"
            if len(e) != g.variable.domain_size:
                return f"embedding e {name} {i} has the wrong length"
            if not is_homomorphism(e, g.variable, gr):
                return f"embedding e {name} {i} is not a homomorphism"
    extra = set(g.constraints) - set(g.source.names)
    if extra:
        return f"constraint gadgets for unknown symbols {sorted(extra)}"
    for (name, i) in g.embeddings:
        if name not in g.source.names or not 1 <= i <= g.source.arity(name):
            return f"embedding e {name} {i} does not match the source signature"
    return None


def arc_gadget() -> GadgetData:
    """Each vertex becomes an edge; an edge glues the head of one to the tail of the next."""
    p1 = Structure.build("P1", 2, (("E", 2),), {"E": [(0, 1)]})
    p2 = Structure.build("P2", 3, (("E", 2),), {"E": [(0, 1), (1, 2)]})
    return GadgetData(Signature((("E", 2),)), p1, {"E": p2}, {("E", 1): (0, 1), ("E", 2): (1, 2)})


def identity_gadget(signature: Signature) -> GadgetData:
    """One point per variable, one generic tuple per constraint: ``phi(I) = I`` and ``rho(B) = B``."""
    point = Structure("G", 1, signature, tuple(() for _ in signature))
    constraints, embeddings = {}, {}
    for name, k in signature:
        rels = tuple((tuple(range(k)),) if other == name else () for other, _ in signature)
        constraints[name] = Structure(f"G_{name}", k, signature, rels)
        for i in range(1, k + 1):
            embeddings[(name, i)] = (i - 1,)
    return GadgetData(signature, point, constraints, embeddings)


def apply_gadget_replacement(g: GadgetData, i: Structure) -> Structure:
    if i.signature != g.source:
        raise SignatureMismatch("instance signature differs from the gadget source signature")
    gv = g.variable
    nv = gv.domain_size
    offset = nv * i.domain_size
    copies = []
    for name, _, rel in i.items():
        gr = g.constraints[name]
        for vs in rel:
            copies.append((name, vs, offset))
            offset += gr.domain_size
    uf = UnionFind(offset)
    raw = [[] for _ in g.target]
    for v in range(i.domain_size):
        base = v * nv
        for r, rel in enumerate(gv.relations):
            raw[r].extend(tuple(base + x for x in t) for t in rel)
    for name, vs, base in copies:
        gr = g.constraints[name]
        for r, rel in enumerate(gr.relations):
            raw[r].extend(tuple(base + x for x in t) for t in rel)
        for pos, v in enumerate(vs, start=1):
            e = g.embeddings[(name, pos)]
            for x in range(nv):
                uf.union(v * nv + x, base + e[x])
    out, _ = quotient(f"phi_{i.name}", g.target, offset, raw, uf)
    return out


def pp_power(g: GadgetData, b: Structure, budget: Budget | None = None) -> Structure:
    if b.signature != g.target:
        raise SignatureMismatch("structure is not similar to the gadgets")
    dom = enumerate_homomorphisms(g.variable, b, budget)
    index = {p: n for n, p in enumerate(dom)}
    rels = []
    for name, k in g.source:
        tuples = set()
        es = [g.embeddings[(name, i)] for i in range(1, k + 1)]
        for f in enumerate_homomorphisms(g.constraints[name], b, budget):
            tuples.add(tuple(index[tuple(f[x] for x in e)] for e in es))
        rels.append(tuple(sorted(tuples)))
    return Structure(f"rho_{b.name}", len(dom), g.source, tuple(rels))


def check_adjunction(g: GadgetData, i: Structure, b: Structure, budget: Budget | None = None) -> bool:
    """``I -> rho(B)`` iff ``phi(I) -> B``; a ``False`` return is a counterexample."""
    left = homomorphism_exists(i, pp_power(g, b, budget), budget)
    right = homomorphism_exists(apply_gadget_replacement(g, i), b, budget)
    return left == right


# --------------------------------------------------------------------------
# gadget bundle files

def parse_gadget_bundle(text: str) -> GadgetData:
    """Read ``source E/2; variable structure ...; constraint E structure ...; e E 1 : 0 1``."""
    toks = Tokens(text)
    source: list[tuple[str, int]] | None = None
    variable: Structure | None = None
    constraints: dict[str, Structure] = {}
    embeddings: dict[tuple[str, int], tuple[int, ...]] = {}
    while not toks.at_end():
        kind, word, line = toks.next()
        if word == "source" and kind == "ident":
            source = []
            if not toks.accept(";"):
                while True:
                    name = toks.ident()
                    toks.expect("/")
                    source.append((name, toks.integer()))
                    if toks.accept(";"):
                        break
                    toks.expect(",")
        elif word == "variable" and kind == "ident":
            variable = read_structure(toks).canonical()
        elif word == "constraint" and kind == "ident":
            name = toks.ident()
            if name in constraints:
                raise ParseError(f"second constraint gadget for {name}", line)
            constraints[name] = read_structure(toks).canonical()
        elif word == "e" and kind == "ident":
            if variable is None:
                raise ParseError("embedding given before the variable gadget", line)
            name = toks.ident()
            pos = toks.integer()
            toks.expect(":")
            embeddings[(name, pos)] = tuple(toks.integer() for _ in range(variable.domain_size))
            toks.accept(";")
        else:
            raise ParseError(f"unexpected {word!r} in gadget bundle", line)
    if source is None or variable is None:
        raise ParseError("bundle needs a 'source' line and a 'variable' gadget")
    try:
        return GadgetData(Signature(tuple(source)), variable, constraints, embeddings)
    except ValueError as exc:
        if isinstance(exc, MalformedGadget):
            raise
        raise ParseError(str(exc)) from exc


def serialize_gadget_bundle(g: GadgetData) -> str:
    parts = ["source " + ", ".join(f"{n}/{k}" for n, k in g.source) + ";",
             "variable " + serialize_structure(g.variable).rstrip()]
    for name, _ in g.source:
        parts.append(f"constraint {name} " + serialize_structure(g.constraints[name]).rstrip())
    for name, k in g.source:
        for i in range(1, k + 1):
            parts.append(f"e {name} {i} : " + " ".join(map(str, g.embeddings[(name, i)])))
    return "\n".join(parts) + "\n"


# --------------------------------------------------------------------------
# arc graph and its right adjoint

def _digraph_edges(g: Structure) -> tuple[tuple[int, int], ...]:
    if len(g.signature) != 1 or g.signature.symbols[0][1] != 2:
        raise SignatureMismatch(f"{g.name} is not a digraph (one binary relation)")
    return g.relations[0]


def arc_graph(g: Structure) -> Structure:
    edges = _digraph_edges(g)
    by_tail: dict[int, list[int]] = {}
    for n, (x, _) in enumerate(edges):
        by_tail.setdefault(x, []).append(n)
    arcs = sorted((m, n) for m, (_, y) in enumerate(edges) for n in by_tail.get(y, ()))
    return Structure(f"delta_{g.name}", len(edges), g.signature, (tuple(arcs),))


def arc_graph_right_adjoint(h: Structure, budget: Budget | None = None) -> Structure:
    """Subsets of ``H`` (vertex ``m`` is the bitmask ``m``); ``U -> V`` when some
    ``u`` in ``U`` has an edge to every ``v`` in ``V``."""
    edges = _digraph_edges(h)
    n = h.domain_size
    budget = budget or default_budget()
    if 2 ** n > budget.max_domain:
        raise BudgetExceeded(f"2^{n} subsets exceed the domain budget {budget.max_domain}")
    out_mask = [0] * n
    for u, v in edges:
        out_mask[u] |= 1 << v
    arcs = []
    for U in range(2 ** n):
        # V is allowed iff V is a subset of out(u) for some u in U
        covers = [out_mask[u] for u in range(n) if U >> u & 1]
        for V in range(2 ** n):
            if any(V & ~m == 0 for m in covers):
                arcs.append((U, V))
    return Structure(f"deltaR_{h.name}", 2 ** n, h.signature, (tuple(arcs),))


def check_arc_adjunction(g: Structure, h: Structure, budget: Budget | None = None) -> bool:
    left = homomorphism_exists(arc_graph(g), h, budget)
    right = homomorphism_exists(g, arc_graph_right_adjoint(h, budget), budget)
    return left == right


# --------------------------------------------------------------------------
# k-reduction

@dataclass(frozen=True)
class PromiseViolation:
    """Some ``I[K]`` has no homomorphism to ``A``, so ``I`` does not map to ``A``."""
    subset: tuple[int, ...]


@dataclass
class KReductionPlan:
    k: int
    subsets: list[tuple[int, ...]]
    homs: dict[tuple[int, ...], list[tuple[int, ...]]]   # F_K, each hom indexed by position in K
    offsets: dict[tuple[int, ...], int]
    restrictions: dict[tuple[tuple[int, ...], tuple[int, ...]], list[int]]  # (L, K) -> F_K -> F_L
    b: Structure
    structure: Structure | None = None
    classes: list[int] | None = None

    def element_origin(self, raw: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """The subset ``K`` and the function ``F_K -> B`` (as digits) of a raw element."""
        for K in reversed(self.subsets):
            if raw >= self.offsets[K]:
                m = len(self.homs[K])
                idx = raw - self.offsets[K]
                base = self.b.domain_size
                digits = tuple((idx // base ** (m - 1 - j)) % base for j in range(m))
                return K, digits
        raise IndexError(raw)

    def evaluation_map(self, h: Sequence[int]) -> tuple[int, ...]:
        """Send ``b`` in the copy for ``K`` to ``b(h|_K)``; needs ``h: I -> A``."""
        if self.structure is None or self.classes is None:
            raise ValueError("plan has not been built")
        out: list[int | None] = [None] * self.structure.domain_size
        where = {K: {f: n for n, f in enumerate(self.homs[K])} for K in self.subsets}
        for raw, cls in enumerate(self.classes):
            K, digits = self.element_origin(raw)
            value = digits[where[K][tuple(h[v] for v in K)]]
            if out[cls] is None:
                out[cls] = value
            elif out[cls] != value:
                raise AssertionError("evaluation map is not constant on an identified class")
        return tuple(out)  # type: ignore[arg-type]


def _subsets(n: int, k: int, include_empty: bool) -> list[tuple[int, ...]]:
    out = []
    for size in range(0 if include_empty else 1, min(k, n) + 1):
        out.extend(itertools.combinations(range(n), size))
    return out


def k_reduction_plan(a: Structure, b: Structure, k: int, i: Structure,
                     budget: Budget | None = None, include_empty: bool = True) -> KReductionPlan | PromiseViolation:
    if k < 1:
        raise ValueError("k must be positive")
    if not (a.similar_to(i) and a.similar_to(b)):
        raise SignatureMismatch("instance and templates must be similar")
    budget = budget or default_budget()
    subsets = _subsets(i.domain_size, k, include_empty)
    homs = {}
    for K in subsets:
        sub = induced_substructure(i, K)
        F = enumerate_homomorphisms(sub, a, budget)
        if not F:
            return PromiseViolation(K)
        homs[K] = F
    offsets = {}
    total = 0
    gadgets = {}
    for K in subsets:
        offsets[K] = total
        gadgets[K], _ = x_power(b, len(homs[K]), budget=budget)
        total += gadgets[K].domain_size
        if total > budget.max_domain:
            raise BudgetExceeded(f"k-reduction output exceeds the domain budget {budget.max_domain}")
    restrictions = {}
    uf = UnionFind(total)
    base = b.domain_size
    for K in subsets:
        kset = set(K)
        mK = len(homs[K])
        for L in subsets:
            if len(L) >= len(K) or not kset.issuperset(L):
                continue
            pos = [K.index(v) for v in L]
            f_index = {f: n for n, f in enumerate(homs[L])}
            restr = [f_index[tuple(h[p] for p in pos)] for h in homs[K]]
            restrictions[(L, K)] = restr
            mL = len(homs[L])
            digits = np.indices((base,) * mL).reshape(mL, -1) if mL else np.zeros((0, 1), dtype=np.int64)
            lifted = digits[restr] if mK else np.zeros((0, digits.shape[1]), dtype=np.int64)
            weights = np.array([base ** (mK - 1 - j) for j in range(mK)], dtype=np.int64)
            idx_k = weights @ lifted if mK else np.zeros(digits.shape[1], dtype=np.int64)
            for b_l, b_k in enumerate(idx_k.tolist()):
                uf.union(offsets[L] + b_l, offsets[K] + b_k)
    raw = [[] for _ in b.signature]
    for K in subsets:
        off = offsets[K]
        for r, rel in enumerate(gadgets[K].relations):
            raw[r].extend(tuple(off + x for x in t) for t in rel)
    structure, classes = quotient(f"kred{k}_{i.name}", b.signature, total, raw, uf)
    return KReductionPlan(k, subsets, homs, offsets, restrictions, b, structure, classes)


def k_reduction(a: Structure, b: Structure, k: int, i: Structure,
                budget: Budget | None = None, include_empty: bool = True) -> Structure | PromiseViolation:
    plan = k_reduction_plan(a, b, k, i, budget, include_empty)
    if isinstance(plan, PromiseViolation):
        return plan
    return plan.structure  # type: ignore[return-value]


# --------------------------------------------------------------------------
# random structures for the property harnesses

def random_structure(rng: random.Random, signature: Signature, size: int, density: float = 0.3,
                     name: str = "R") -> Structure:
    rels = []
    for _, k in signature:
        rels.append([t for t in itertools.product(range(size), repeat=k) if rng.random() < density])
    return Structure.build(name, size, signature, rels)
