"""Homomorphism search: backtracking with generalized arc consistency.

Candidate sets are bitmasks over the target domain. Every constraint scope is
kept as one GAC unit (repeated variables inside a tuple are folded into the
allowed-tuple table first). Variables are branched on by smallest candidate
set, ties broken by index; values ascend.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .config import Budget, default_budget
from .errors import CapExceeded, InvalidSandwich, NodeLimitExceeded, SignatureMismatch
from .structures import Homomorphism, Structure, is_homomorphism


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Binary:
    __slots__ = ("x", "y", "fwd", "bwd")

    def __init__(self, x, y, pairs, m):
        self.x, self.y = x, y
        self.fwd = [0] * m  # value of x -> supported values of y
        self.bwd = [0] * m
        for a, b in pairs:
            self.fwd[a] |= 1 << b
            self.bwd[b] |= 1 << a

    def revise(self, doms, changed):
        ok = True
        for src, dst, table in ((self.x, self.y, self.fwd), (self.y, self.x, self.bwd)):
            support = 0
            for a in _bits(doms[src]):
                support |= table[a]
            new = doms[dst] & support
            if new != doms[dst]:
                doms[dst] = new
                changed.append(dst)
                if not new:
                    return False
        return ok


class _Nary:
    __slots__ = ("scope", "tuples")

    def __init__(self, scope, tuples):
        self.scope = scope
        self.tuples = tuples

    def revise(self, doms, changed):
        scope = self.scope
        k = len(scope)
        support = [0] * k
        cur = [doms[v] for v in scope]
        for t in self.tuples:
            for p in range(k):
                if not (cur[p] >> t[p]) & 1:
                    break
            else:
                for p in range(k):
                    support[p] |= 1 << t[p]
        for p, v in enumerate(scope):
            new = doms[v] & support[p]
            if new != doms[v]:
                doms[v] = new
                changed.append(v)
                if not new:
                    return False
        return True


class _Search:
    def __init__(self, source: Structure, target: Structure, budget: Budget | None = None,
                 injective: bool = False):
        if not source.similar_to(target):
            raise SignatureMismatch(f"{source.name} and {target.name} are not similar")
        self.budget = budget or default_budget()
        self.n = source.domain_size
        self.m = target.domain_size
        self.injective = injective
        self.nodes = 0
        full = (1 << self.m) - 1
        self.initial = [full] * self.n
        self.empty = False
        seen = set()
        self.constraints = []
        for src_rel, dst_rel in zip(source.relations, target.relations):
            for t in src_rel:
                scope = tuple(dict.fromkeys(t))
                key = (scope, t, id(dst_rel))
                if key in seen:
                    continue
                seen.add(key)
                where = [scope.index(v) for v in t]
                allowed = set()
                for u in dst_rel:
                    proj = [None] * len(scope)
                    good = True
                    for pos, val in zip(where, u):
                        if proj[pos] is None:
                            proj[pos] = val
                        elif proj[pos] != val:
                            good = False
                            break
                    if good:
                        allowed.add(tuple(proj))
                if len(scope) == 1:
                    mask = 0
                    for (a,) in allowed:
                        mask |= 1 << a
                    self.initial[scope[0]] &= mask
                    if not self.initial[scope[0]]:
                        self.empty = True
                elif len(scope) == 2:
                    self.constraints.append(_Binary(scope[0], scope[1], allowed, self.m))
                else:
                    self.constraints.append(_Nary(scope, sorted(allowed)))
        self.watch = [[] for _ in range(self.n)]
        for c in self.constraints:
            for v in (c.scope if isinstance(c, _Nary) else (c.x, c.y)):
                self.watch[v].append(c)
        if self.injective and self.n > self.m:
            self.empty = True

    def propagate(self, doms: list[int], touched: Sequence[int] | None = None) -> bool:
        if touched is None:
            queue = list(self.constraints)
            singles = [v for v in range(self.n) if doms[v] and not doms[v] & (doms[v] - 1)]
        else:
            queue = []
            singles = []
            for v in touched:
                queue.extend(self.watch[v])
                if self.injective and doms[v] and not doms[v] & (doms[v] - 1):
                    singles.append(v)
        if any(d == 0 for d in doms):
            return False
        pending = set(map(id, queue))
        while queue or (self.injective and singles):
            if self.injective and singles:
                v = singles.pop()
                bit = doms[v]
                for w in range(self.n):
                    if w != v and doms[w] & bit:
                        doms[w] &= ~bit
                        if not doms[w]:
                            return False
                        for c in self.watch[w]:
                            if id(c) not in pending:
                                pending.add(id(c))
                                queue.append(c)
                        if not doms[w] & (doms[w] - 1):
                            singles.append(w)
                continue
            c = queue.pop()
            pending.discard(id(c))
            changed: list[int] = []
            if not c.revise(doms, changed):
                return False
            for v in changed:
                for c2 in self.watch[v]:
                    if c2 is not c and id(c2) not in pending:
                        pending.add(id(c2))
                        queue.append(c2)
                if self.injective and not doms[v] & (doms[v] - 1):
                    singles.append(v)
        return True

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.budget.node_limit:
            raise NodeLimitExceeded(f"search exceeded node limit {self.budget.node_limit}")

    def solutions(self, doms: list[int]) -> Iterator[list[int]]:
        """Yield every solution below ``doms`` (assumed already propagated)."""
        self._tick()
        best, best_size = -1, None
        for v, d in enumerate(doms):
            if d & (d - 1):
                size = d.bit_count()
                if best_size is None or size < best_size:
                    best, best_size = v, size
                    if size == 2:
                        break
        if best < 0:
            yield [d.bit_length() - 1 for d in doms]
            return
        for val in _bits(doms[best]):
            child = doms.copy()
            child[best] = 1 << val
            if self.propagate(child, (best,)):
                yield from self.solutions(child)

    def count(self, doms: list[int]) -> int:
        self._tick()
        best, best_size = -1, None
        for v, d in enumerate(doms):
            if d & (d - 1):
                size = d.bit_count()
                if best_size is None or size < best_size:
                    best, best_size = v, size
                    if size == 2:
                        break
        if best < 0:
            return 1
        total = 0
        for val in _bits(doms[best]):
            child = doms.copy()
            child[best] = 1 << val
            if self.propagate(child, (best,)):
                total += self.count(child)
        return total

    def root(self) -> list[int] | None:
        if self.empty:
            return None
        doms = self.initial.copy()
        return doms if self.propagate(doms) else None

    def first(self, doms: list[int]) -> list[int] | None:
        return next(self.solutions(doms), None)

    def least(self) -> list[int] | None:
        """Lexicographically least solution, found by probing values in index order."""
        doms = self.root()
        if doms is None:
            return None
        sol = self.first(doms)
        if sol is None:
            return None
        for v in range(self.n):
            for val in _bits(doms[v]):
                trial = doms.copy()
                trial[v] = 1 << val
                if not self.propagate(trial, (v,)):
                    continue
                if val == sol[v]:
                    doms = trial
                    break
                found = self.first(trial)
                if found is not None:
                    sol, doms = found, trial
                    break
        return sol


def find_homomorphism(source: Structure, target: Structure, budget: Budget | None = None,
                      injective: bool = False) -> Homomorphism | None:
    """Lexicographically least homomorphism ``source -> target`` or ``None``."""
    sol = _Search(source, target, budget, injective).least()
    return None if sol is None else tuple(sol)


def homomorphism_exists(source: Structure, target: Structure, budget: Budget | None = None) -> bool:
    search = _Search(source, target, budget)
    doms = search.root()
    return doms is not None and search.first(doms) is not None


def enumerate_homomorphisms(source: Structure, target: Structure,
                            budget: Budget | None = None) -> list[Homomorphism]:
    search = _Search(source, target, budget)
    doms = search.root()
    if doms is None:
        return []
    cap = search.budget.enumeration_cap
    out = []
    for sol in search.solutions(doms):
        out.append(tuple(sol))
        if len(out) > cap:
            raise CapExceeded(f"more than {cap} homomorphisms")
    out.sort()
    return out


def count_homomorphisms(source: Structure, target: Structure, budget: Budget | None = None) -> int:
    search = _Search(source, target, budget)
    doms = search.root()
    return 0 if doms is None else search.count(doms)


def find_isomorphism(a: Structure, b: Structure, budget: Budget | None = None) -> Homomorphism | None:
    """A bijection mapping every relation of ``a`` onto that of ``b``."""
    if not a.similar_to(b) or a.domain_size != b.domain_size:
        return None
    if any(len(r) != len(s) for r, s in zip(a.relations, b.relations)):
        return None
    # bijective + equal relation sizes => relations are mapped onto each other
    return find_homomorphism(a, b, budget, injective=True)


def are_isomorphic(a: Structure, b: Structure, budget: Budget | None = None) -> bool:
    return find_isomorphism(a, b, budget) is not None


@dataclass(frozen=True)
class PCSPVerdict:
    maps_to_a: bool
    maps_to_b: bool

    @property
    def in_promise(self) -> bool:
        """False for instances that map to B but not A being labelled outside the
        yes-side; instances with neither flag are valid no-instances."""
        return self.maps_to_a or not self.maps_to_b

    @property
    def label(self) -> str:
        if self.maps_to_a:
            return "yes"
        if not self.maps_to_b:
            return "no"
        return "outside-promise"


@lru_cache(maxsize=256)
def _template_ok(a: Structure, b: Structure) -> bool:
    return homomorphism_exists(a, b)


def check_template(a: Structure, b: Structure) -> None:
    if not a.similar_to(b):
        raise SignatureMismatch(f"{a.name} and {b.name} are not similar")
    if not _template_ok(a, b):
        raise ValueError(f"({a.name}, {b.name}) is not a PCSP template: {a.name} does not map to {b.name}")


def decide_pcsp_oracle(a: Structure, b: Structure, i: Structure,
                       budget: Budget | None = None) -> PCSPVerdict:
    check_template(a, b)
    return PCSPVerdict(homomorphism_exists(i, a, budget), homomorphism_exists(i, b, budget))


def solve_via_finite_sandwich(s: Structure, hom_sb: Sequence[int], b: Structure, i: Structure,
                              budget: Budget | None = None) -> Homomorphism | None:
    """Solve CSP(S) on ``i`` and push the answer through a fixed map ``S -> B``."""
    if not is_homomorphism(hom_sb, s, b):
        raise InvalidSandwich(f"supplied map is not a homomorphism {s.name} -> {b.name}")
    h = find_homomorphism(i, s, budget)
    if h is None:
        return None
    return tuple(hom_sb[x] for x in h)
