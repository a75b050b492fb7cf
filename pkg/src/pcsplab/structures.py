"""Finite relational structures, powers, and the ``.st`` text format.

Domain elements are the integers ``0..n-1``. Relations are stored as sorted,
duplicate-free tuples of tuples; :meth:`Structure.build` produces that
canonical form, while the plain constructor keeps whatever it is given so
that :func:`validate_structure` can report malformed input.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .config import Budget, default_budget
from .errors import BudgetExceeded, ParseError

Tuple = tuple[int, ...]
Homomorphism = tuple[int, ...]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_'.\-]*\Z")


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple((str(n), int(k)) for n, k in self.symbols))
        seen = set()
        for name, arity in self.symbols:
            if name in seen:
                raise ValueError(f"duplicate relation symbol {name!r}")
            if arity < 1:
                raise ValueError(f"symbol {name!r} has arity {arity}; arities must be >= 1")
            seen.add(name)

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def index(self, name: str) -> int:
        for pos, (sym, _) in enumerate(self.symbols):
            if sym == name:
                return pos
        raise KeyError(name)

    def arity(self, name: str) -> int:
        return self.symbols[self.index(name)][1]


@dataclass(frozen=True)
class Structure:
    name: str
    domain_size: int
    signature: Signature
    relations: tuple[tuple[Tuple, ...], ...]

    @classmethod
    def build(cls, name: str, domain_size: int,
              symbols: Iterable[tuple[str, int]],
              relations: Mapping[str, Iterable[Sequence[int]]] | Sequence[Iterable[Sequence[int]]]
              ) -> "Structure":
        """Construct a structure in canonical form (sorted, deduplicated)."""
        sig = symbols if isinstance(symbols, Signature) else Signature(tuple(symbols))
        if isinstance(relations, Mapping):
            unknown = set(relations) - set(sig.names)
            if unknown:
                raise ValueError(f"relations for unknown symbols: {sorted(unknown)}")
            rels = [relations.get(name, ()) for name in sig.names]
        else:
            rels = list(relations)
            if len(rels) != len(sig):
                raise ValueError("relation list does not match signature length")
        canon = tuple(tuple(sorted({tuple(int(x) for x in t) for t in rel})) for rel in rels)
        s = cls(name, int(domain_size), sig, canon)
        problem = validate_structure(s)
        if problem is not None:
            raise ValueError(str(problem))
        return s

    def relation(self, name: str) -> tuple[Tuple, ...]:
        return self.relations[self.signature.index(name)]

    def items(self):
        """Yield ``(name, arity, tuples)`` in signature order."""
        for (name, arity), rel in zip(self.signature, self.relations):
            yield name, arity, rel

    def similar_to(self, other: "Structure") -> bool:
        return self.signature == other.signature

    def renamed(self, name: str) -> "Structure":
        return Structure(name, self.domain_size, self.signature, self.relations)

    def canonical(self) -> "Structure":
        return Structure(self.name, self.domain_size, self.signature,
                         tuple(tuple(sorted(set(rel))) for rel in self.relations))

    def same_content(self, other: "Structure") -> bool:
        """Equality ignoring the name."""
        return (self.domain_size == other.domain_size and self.signature == other.signature
                and self.relations == other.relations)

    def __repr__(self):
        sizes = ", ".join(f"{n}/{k}:{len(r)}" for n, k, r in self.items())
        return f"Structure({self.name!r}, domain={self.domain_size}, {sizes})"


@dataclass(frozen=True)
class Violation:
    symbol: str | None
    tuple: Tuple | None
    reason: str

    def __str__(self):
        where = f" in {self.symbol}" if self.symbol is not None else ""
        what = f" at {self.tuple}" if self.tuple is not None else ""
        return f"{self.reason}{where}{what}"


def validate_structure(s: Structure) -> Violation | None:
    """Return ``None`` when ``s`` is well formed, else the first violation."""
    if s.domain_size < 0:
        return Violation(None, None, "negative domain size")
    if len(s.relations) != len(s.signature):
        return Violation(None, None, "relation count does not match signature")
    for (name, arity), rel in zip(s.signature, s.relations):
        prev = None
        for t in rel:
            if len(t) != arity:
                return Violation(name, tuple(t), f"tuple length differs from arity {arity}")
            for x in t:
                if not 0 <= x < s.domain_size:
                    return Violation(name, tuple(t), "entry out of range")
            if prev is not None and not prev < t:
                return Violation(name, tuple(t), "not canonical")
            prev = t
    return None


def is_homomorphism(h: Sequence[int], source: Structure, target: Structure) -> bool:
    if len(h) != source.domain_size or not source.similar_to(target):
        return False
    if any(not 0 <= x < target.domain_size for x in h):
        return False
    for src_rel, dst_rel in zip(source.relations, target.relations):
        allowed = set(dst_rel)
        for t in src_rel:
            if tuple(h[x] for x in t) not in allowed:
                return False
    return True


# --------------------------------------------------------------------------
# mixed radix encoding, most significant coordinate first

def encode(digits: Sequence[int], base: int) -> int:
    value = 0
    for d in digits:
        value = value * base + d
    return value


def decode(index: int, base: int, length: int) -> Tuple:
    out = [0] * length
    for pos in range(length - 1, -1, -1):
        index, out[pos] = divmod(index, base)
    return tuple(out)


def _check_power_budget(size: int, exponent: int, budget: Budget | None) -> int:
    budget = budget or default_budget()
    total = size ** exponent
    if total > budget.max_domain:
        raise BudgetExceeded(f"power domain {size}^{exponent} = {total} exceeds cap {budget.max_domain}")
    return total


def _power_relations(b: Structure, n: int) -> list[tuple[Tuple, ...]]:
    base = b.domain_size
    rels = []
    for _, arity, rel in b.items():
        out = set()
        for columns in itertools.product(rel, repeat=n):
            out.add(tuple(encode([col[row] for col in columns], base) for row in range(arity)))
        rels.append(tuple(sorted(out)))
    return rels


def power(b: Structure, n: int, budget: Budget | None = None) -> Structure:
    """The ``n``-th direct power; element ``i`` decodes to ``decode(i, |B|, n)``."""
    if n < 1:
        raise ValueError("power exponent must be >= 1")
    size = _check_power_budget(b.domain_size, n, budget)
    return Structure(f"{b.name}_pow{n}", size, b.signature, tuple(_power_relations(b, n)))


def x_power(b: Structure, exponent_size: int, labels: Sequence[str] = (),
            budget: Budget | None = None) -> tuple[Structure, dict[str, int]]:
    """Power indexed by a labelled set; returns the structure and label -> coordinate."""
    labels = list(labels)
    if labels and len(labels) != exponent_size:
        raise ValueError("label count does not match exponent size")
    if len(set(labels)) != len(labels):
        raise ValueError("labels must be distinct")
    if exponent_size < 0:
        raise ValueError("exponent size must be non-negative")
    size = _check_power_budget(b.domain_size, exponent_size, budget)
    s = Structure(f"{b.name}_xpow{exponent_size}", size, b.signature,
                  tuple(_power_relations(b, exponent_size)))
    return s, {label: pos for pos, label in enumerate(labels)}


def induced_substructure(s: Structure, elements: Sequence[int]) -> Structure:
    """Substructure on ``elements`` renumbered in the given order."""
    pos = {x: i for i, x in enumerate(elements)}
    rels = []
    for _, _, rel in s.items():
        rels.append(tuple(sorted(tuple(pos[x] for x in t) for t in rel if all(x in pos for x in t))))
    return Structure(f"{s.name}_sub", len(elements), s.signature, tuple(rels))


def disjoint_union(name: str, parts: Sequence[Structure]) -> Structure:
    if not parts:
        raise ValueError("need at least one part")
    sig = parts[0].signature
    rels = [[] for _ in sig.symbols]
    offset = 0
    for p in parts:
        if p.signature != sig:
            raise ValueError("parts are not similar")
        for r, rel in enumerate(p.relations):
            rels[r].extend(tuple(x + offset for x in t) for t in rel)
        offset += p.domain_size
    return Structure.build(name, offset, sig, rels)


# --------------------------------------------------------------------------
# built-in templates and instances

EDGE = (("E", 2),)
TERNARY = (("R", 3),)


def complete_graph(n: int) -> Structure:
    return Structure.build(f"K{n}", n, EDGE, {"E": [(a, b) for a in range(n) for b in range(n) if a != b]})


def nae(n: int) -> Structure:
    tuples = [t for t in itertools.product(range(n), repeat=3) if not t[0] == t[1] == t[2]]
    return Structure.build(f"H{n}", n, TERNARY, {"R": tuples})


def one_in_three() -> Structure:
    return Structure.build("T", 2, TERNARY, {"R": [(1, 0, 0), (0, 1, 0), (0, 0, 1)]})


def directed_path(n: int) -> Structure:
    """Path with ``n`` edges on vertices ``0..n``."""
    return Structure.build(f"P{n}", n + 1, EDGE, {"E": [(i, i + 1) for i in range(n)]})


def directed_cycle(n: int) -> Structure:
    return Structure.build(f"C{n}", n, EDGE, {"E": [(i, (i + 1) % n) for i in range(n)]})


def undirected(g: Structure, name: str | None = None) -> Structure:
    if g.signature != Signature(EDGE):
        raise ValueError("undirected() expects a single binary relation E")
    edges = set(g.relations[0]) | {(b, a) for a, b in g.relations[0]}
    return Structure.build(name or f"{g.name}u", g.domain_size, EDGE, {"E": edges})


def undirected_cycle(n: int) -> Structure:
    return undirected(directed_cycle(n), f"UC{n}")


def three_sat() -> Structure:
    """Boolean template of 3-SAT: ``R_i`` holds the clauses with ``i`` negated literals."""
    rels = {}
    for neg in range(4):
        lits = [True] * (3 - neg) + [False] * neg
        rels[f"R{neg}"] = [t for t in itertools.product((0, 1), repeat=3)
                           if any((x == 1) == positive for x, positive in zip(t, lits))]
    return Structure.build("SAT3", 2, tuple((f"R{i}", 3) for i in range(4)), rels)


_BUILTIN = re.compile(r"(K|H|P|C|UC)(\d+)\Z")


def builtin(name: str) -> Structure:
    """Resolve ``K3``, ``H2``, ``T``, ``P4``, ``C5``, ``UC5`` or ``SAT3``."""
    if name == "T":
        return one_in_three()
    if name == "SAT3":
        return three_sat()
    m = _BUILTIN.match(name)
    if not m:
        raise KeyError(f"unknown built-in structure {name!r}")
    kind, n = m.group(1), int(m.group(2))
    factory = {"K": complete_graph, "H": nae, "P": directed_path, "C": directed_cycle, "UC": undirected_cycle}
    if kind in ("C", "UC") and n < 1:
        raise KeyError(name)
    return factory[kind](n)


# --------------------------------------------------------------------------
# text format

_TOKEN = re.compile(r"\s*(?:(#[^\n]*)|(\d+)|([A-Za-z_][A-Za-z0-9_'.\-]*)|(.))", re.S)


class Tokens:
    """Whitespace/comment-insensitive token stream with line tracking."""

    def __init__(self, text: str):
        self.items: list[tuple[str, str, int]] = []
        line, pos = 1, 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                break
            if m.lastindex is not None:
                start = m.start(m.lastindex)
                tok_line = line + text.count("\n", pos, start)
                kind = {1: None, 2: "int", 3: "ident", 4: "punct"}[m.lastindex]
                if kind is not None and not m.group(m.lastindex).isspace():
                    self.items.append((kind, m.group(m.lastindex), tok_line))
            line += text.count("\n", pos, m.end())
            pos = m.end()
        self.pos = 0

    def peek(self, offset: int = 0):
        i = self.pos + offset
        return self.items[i] if i < len(self.items) else ("eof", "", self.items[-1][2] if self.items else 1)

    def next(self):
        tok = self.peek()
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def at_end(self) -> bool:
        return self.peek()[0] == "eof"

    def expect(self, value: str):
        kind, text, line = self.next()
        if text != value or kind == "eof":
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", line)
        return text

    def ident(self) -> str:
        kind, text, line = self.next()
        if kind != "ident":
            raise ParseError(f"expected identifier, found {text or 'end of input'!r}", line)
        return text

    def integer(self) -> int:
        kind, text, line = self.next()
        if kind != "int":
            raise ParseError(f"expected integer, found {text or 'end of input'!r}", line)
        return int(text)

    def accept(self, value: str) -> bool:
        if self.peek()[1] == value and self.peek()[0] != "eof":
            self.pos += 1
            return True
        return False


def read_structure(toks: Tokens) -> Structure:
    """Parse one ``structure NAME { ... }`` block; tuples are kept as written."""
    toks.expect("structure")
    name = toks.ident()
    toks.expect("{")
    kw_line = toks.peek()[2]
    if toks.ident() != "domain":
        raise ParseError("structure body must start with 'domain'", kw_line)
    names: dict[str, int] | None = None
    if toks.accept("{"):
        names = {}
        if not toks.accept("}"):
            while True:
                label = toks.ident()
                if label in names:
                    raise ParseError(f"duplicate element name {label!r}", toks.peek(-1)[2])
                names[label] = len(names)
                if toks.accept("}"):
                    break
                toks.expect(",")
        size = len(names)
    else:
        size = toks.integer()
    toks.expect(";")
    symbols: list[tuple[str, int]] = []
    rels: list[tuple[Tuple, ...]] = []
    while not toks.accept("}"):
        line = toks.peek()[2]
        if toks.ident() != "relation":
            raise ParseError("expected 'relation' or '}'", line)
        rname = toks.ident()
        toks.expect("/")
        arity = toks.integer()
        if arity < 1:
            raise ParseError(f"relation {rname} has arity {arity}", line)
        if any(rname == s for s, _ in symbols):
            raise ParseError(f"duplicate relation {rname}", line)
        toks.expect("=")
        toks.expect("{")
        tuples: list[Tuple] = []
        if not toks.accept("}"):
            while True:
                tline = toks.peek()[2]
                toks.expect("(")
                entries = []
                while True:
                    kind, text, eline = toks.next()
                    if kind == "int":
                        if int(text) >= size:
                            raise ParseError(f"element {text} outside domain {size}", eline)
                        entries.append(int(text))
                    elif kind == "ident" and names is not None and text in names:
                        entries.append(names[text])
                    else:
                        raise ParseError(f"bad tuple entry {text!r}", eline)
                    if toks.accept(")"):
                        break
                    toks.expect(",")
                if len(entries) != arity:
                    raise ParseError(f"tuple {tuple(entries)} does not have arity {arity}", tline)
                tuples.append(tuple(entries))
                if toks.accept("}"):
                    break
                toks.expect(",")
        toks.expect(";")
        symbols.append((rname, arity))
        rels.append(tuple(tuples))
    return Structure(name, size, Signature(tuple(symbols)), tuple(rels))


def parse_structure(text: str) -> Structure:
    toks = Tokens(text)
    s = read_structure(toks)
    if not toks.at_end():
        raise ParseError(f"trailing input {toks.peek()[1]!r}", toks.peek()[2])
    return s


def format_tuple(t: Sequence[int]) -> str:
    return "(" + ", ".join(str(x) for x in t) + ")"


def safe_name(name: str) -> str:
    cleaned = re.sub(r"[^A-Za-z0-9_'.\-]", "_", name) or "S"
    return cleaned if is_identifier(cleaned) else "S_" + cleaned


def serialize_structure(s: Structure, indent: str = "  ") -> str:
    lines = [f"structure {safe_name(s.name)} {{", f"{indent}domain {s.domain_size};"]
    for name, arity, rel in s.items():
        body = ", ".join(format_tuple(t) for t in rel)
        lines.append(f"{indent}relation {name}/{arity} = {{ {body} }};" if body
                     else f"{indent}relation {name}/{arity} = {{ }};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_structure(path) -> Structure:
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read())


def is_identifier(name: str) -> bool:
    return bool(_IDENT.match(name))
