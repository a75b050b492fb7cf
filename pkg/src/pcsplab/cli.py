"""Command-line front end: ``pcsplab <command> ...``.

Exit codes: 0 decided/constructed, 1 negative answer, 2 usage error,
3 budget exceeded.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import os
import random
import sys
from dataclasses import dataclass

from .config import default_budget
from .errors import BudgetExceeded, PCSPError
from .homs import check_template, decide_pcsp_oracle, find_homomorphism, solve_via_finite_sandwich
from .minions import (Pol, Projections, classify_table, enumerate_polymorphisms, free_structure,
                      check_condition, count_polymorphisms, parse_condition,
                      polymorphism_slice, projection_slice, search_minion_homomorphism,
                      solve_condition, trivial_witness)
from .reductions import (PromiseViolation, arc_gadget, arc_graph, arc_graph_right_adjoint,
                         apply_gadget_replacement, check_adjunction, check_arc_adjunction,
                         k_reduction, parse_gadget_bundle, pp_power, random_structure)
from .relaxations import aip, blp, blp_aip, round_one_in_three
from .structures import Signature, builtin, load_structure, one_in_three, serialize_structure

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


@dataclass(frozen=True)
class CommandResult:
    exit_code: int
    report: str


def structure_arg(text: str):
    """A structure file path, or a built-in name such as ``K3``, ``H2``, ``T``."""
    if os.path.exists(text):
        return load_structure(text)
    try:
        return builtin(text)
    except KeyError:
        raise argparse.ArgumentTypeError(f"no such file or built-in structure: {text}")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(args, s) -> None:
    text = serialize_structure(s)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)


def _fmt(values) -> str:
    return " ".join(str(v) for v in values)


# --------------------------------------------------------------------------
# commands

def cmd_solve(args, budget) -> int:
    a, b, inst = args.template[0], args.template[1], args.instance
    check_template(a, b)
    algo = args.algo
    if algo == "brute":
        verdict = decide_pcsp_oracle(a, b, inst, budget)
        print(f"promise: {verdict.label}")
        if verdict.maps_to_b:
            print("accept")
            print("assignment:", _fmt(find_homomorphism(inst, b, budget)))
            return EXIT_OK
        print("reject")
        return EXIT_NO
    if algo.startswith("sandwich:"):
        parts = algo.split(":")
        if len(parts) != 3:
            raise ValueError("use --algo sandwich:S.st:hom.map")
        s = structure_arg(parts[1])
        hom = tuple(int(x) for x in _read(parts[2]).split())
        h = solve_via_finite_sandwich(s, hom, b, inst, budget)
        if h is None:
            print("reject")
            return EXIT_NO
        print("accept")
        print("assignment:", _fmt(h))
        return EXIT_OK
    runner = {"blp": blp, "aip": aip, "blp+aip": blp_aip}.get(algo)
    if runner is None:
        raise ValueError(f"unknown algorithm {algo!r}")
    res = runner(a, inst)
    print(res.verdict)
    if res.accepted and algo != "blp" and a.same_content(one_in_three()) and inst.domain_size:
        print("assignment:", _fmt(round_one_in_three(inst, res.point)))
    if res.certificate is not None:
        print("certificate:", _fmt(res.certificate.y))
    return EXIT_OK if res.accepted else EXIT_NO


def cmd_poly_enum(args, budget) -> int:
    sl = enumerate_polymorphisms(args.a, args.b, args.n, budget)
    tables = sl.at(args.n)
    print(f"count {len(tables)}")
    for t in tables:
        line = _fmt(t.values)
        if args.classify:
            c = classify_table(t)
            flags = [name for name, on in (("symmetric", c.symmetric), ("parity-symmetric", c.parity_symmetric),
                                           ("cancellation", c.cancellation), ("alternating", c.alternating)) if on]
            ess = ",".join(map(str, sorted(c.essential_coords))) or "-"
            line += f"  essential={ess}" + (" " + " ".join(flags) if flags else "")
        print(line)
    return EXIT_OK


def cmd_poly_count(args, budget) -> int:
    print(count_polymorphisms(args.a, args.b, args.n, budget))
    return EXIT_OK


def cmd_poly_condition(args, budget) -> int:
    cond = parse_condition(_read(args.condition))
    check_template(args.a, args.b)
    if args.n is None:
        witness = solve_condition(cond, args.a, args.b, budget)
        how = "search over the compiled instance"
    else:
        window = polymorphism_slice(args.a, args.b, range(1, args.n + 1), budget)
        witness = check_condition(cond, window)
        how = f"exhaustive over arities 1..{args.n}"
    if witness is None:
        print(f"unsatisfied ({how})")
        return EXIT_NO
    print(f"satisfied ({how})")
    for name, _ in cond.symbols:
        print(f"{name}: {_fmt(witness[name].values)}")
    return EXIT_OK


def cmd_poly_trivial(args, budget) -> int:
    cond = parse_condition(_read(args.condition))
    pick = trivial_witness(cond)
    if pick is None:
        print("nontrivial")
        return EXIT_NO
    print("trivial")
    print("projections:", ", ".join(f"{k}->{v}" for k, v in pick.items()))
    return EXIT_OK


def _window(spec: list[str], n: int, budget):
    arities = range(1, n + 1)
    if spec == ["P"]:
        return projection_slice(2, arities)
    if len(spec) != 2:
        raise ValueError("a window is 'P' or a template pair 'A B'")
    a, b = structure_arg(spec[0]), structure_arg(spec[1])
    return polymorphism_slice(a, b, arities, budget)


def cmd_poly_minionhom(args, budget) -> int:
    frm = _window(args.source, args.n, budget)
    to = _window(args.dest, args.n, budget)
    res = search_minion_homomorphism(frm, to)
    if res is None:
        print(f"none: no minor-preserving map on arities 1..{args.n}")
        return EXIT_NO
    print(f"found on arities 1..{args.n} (bounded evidence, not a certificate)")
    for f, g in res.mapping.items():
        print(f"{_fmt(f.values)} -> {_fmt(g.values)}")
    return EXIT_OK


def cmd_reduce(args, budget) -> int:
    kind = args.kind
    if kind == "gadget":
        _emit(args, apply_gadget_replacement(_bundle(args.bundle), args.structure))
    elif kind == "pppower":
        _emit(args, pp_power(_bundle(args.bundle), args.structure, budget))
    elif kind == "arcgraph":
        _emit(args, arc_graph(args.structure))
    elif kind == "arcgraph-right":
        _emit(args, arc_graph_right_adjoint(args.structure, budget))
    elif kind == "k":
        out = k_reduction(args.a, args.b, args.k, args.structure, budget)
        if isinstance(out, PromiseViolation):
            print(f"promise violation: the substructure on {list(out.subset)} has no homomorphism to {args.a.name}")
            return EXIT_NO
        _emit(args, out)
    return EXIT_OK


def _bundle(path: str):
    if path == "arc":
        return arc_gadget()
    return parse_gadget_bundle(_read(path))


def cmd_free(args, budget) -> int:
    if args.projections:
        minion = Projections(2)
    else:
        check_template(args.a, args.b)
        minion = Pol(args.a, args.b, budget)
    _emit(args, free_structure(minion, args.generator, budget))
    return EXIT_OK


def cmd_check(args, budget) -> int:
    rng = random.Random(args.seed)
    if args.bundle == "arc-graph":
        sig = Signature((("E", 2),))
        test = lambda g, h: check_arc_adjunction(g, h, budget)
        source_sig = target_sig = sig
    else:
        gadget = _bundle(args.bundle)
        source_sig, target_sig = gadget.source, gadget.target
        test = lambda i, b: check_adjunction(gadget, i, b, budget)
    failures = 0
    for n in range(args.random):
        i = random_structure(rng, source_sig, rng.randint(1, args.max_size), args.density, f"I{n}")
        b = random_structure(rng, target_sig, rng.randint(1, args.max_size), args.density, f"B{n}")
        if not test(i, b):
            failures += 1
            print(f"counterexample {n}:")
            sys.stdout.write(serialize_structure(i))
            sys.stdout.write(serialize_structure(b))
    print(f"{args.random - failures}/{args.random} triples satisfy the adjunction")
    return EXIT_OK if failures == 0 else EXIT_NO


def cmd_show(args, budget) -> int:
    _emit(args, args.structure)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcsplab", description="Promise CSP laboratory")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--max-domain", type=int, help="largest power / structure domain to build")
    p.add_argument("--node-limit", type=int, help="search node limit")
    p.add_argument("--enum-cap", type=int, help="largest enumeration to materialise")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decide an instance of PCSP(A, B)")
    s.add_argument("--template", nargs=2, type=structure_arg, required=True, metavar=("A", "B"))
    s.add_argument("--instance", type=structure_arg, required=True)
    s.add_argument("--algo", default="brute", help="brute | sandwich:S.st:hom.map | blp | aip | blp+aip")
    s.set_defaults(func=cmd_solve)

    poly = sub.add_parser("poly", help="polymorphism minions").add_subparsers(dest="poly", required=True)
    e = poly.add_parser("enum")
    e.add_argument("a", type=structure_arg)
    e.add_argument("b", type=structure_arg)
    e.add_argument("-n", type=int, required=True)
    e.add_argument("--classify", action="store_true")
    e.set_defaults(func=cmd_poly_enum)
    c = poly.add_parser("count")
    c.add_argument("a", type=structure_arg)
    c.add_argument("b", type=structure_arg)
    c.add_argument("-n", type=int, required=True)
    c.set_defaults(func=cmd_poly_count)
    m = poly.add_parser("condition")
    m.add_argument("condition")
    m.add_argument("a", type=structure_arg)
    m.add_argument("b", type=structure_arg)
    m.add_argument("-n", type=int, help="search the enumerated window 1..N (default: compiled search)")
    m.set_defaults(func=cmd_poly_condition)
    t = poly.add_parser("trivial")
    t.add_argument("condition")
    t.set_defaults(func=cmd_poly_trivial)
    h = poly.add_parser("minionhom")
    h.add_argument("--from", dest="source", nargs="+", required=True, metavar="P|A B")
    h.add_argument("--to", dest="dest", nargs="+", required=True, metavar="P|A B")
    h.add_argument("-n", type=int, required=True)
    h.set_defaults(func=cmd_poly_minionhom)

    r = sub.add_parser("reduce", help="instance and template constructions")
    rs = r.add_subparsers(dest="kind", required=True)
    for name, first in (("gadget", "bundle"), ("pppower", "bundle")):
        q = rs.add_parser(name)
        q.add_argument("bundle", help="gadget bundle file, or 'arc'")
        q.add_argument("structure", type=structure_arg)
        q.add_argument("-o", "--output")
    for name in ("arcgraph", "arcgraph-right"):
        q = rs.add_parser(name)
        q.add_argument("structure", type=structure_arg)
        q.add_argument("-o", "--output")
    q = rs.add_parser("k")
    q.add_argument("a", type=structure_arg)
    q.add_argument("b", type=structure_arg)
    q.add_argument("-k", type=int, required=True)
    q.add_argument("structure", type=structure_arg)
    q.add_argument("-o", "--output")
    r.set_defaults(func=cmd_reduce)

    f = sub.add_parser("free", help="free structure of Pol(A, B) generated by G")
    f.add_argument("a", type=structure_arg, nargs="?")
    f.add_argument("b", type=structure_arg, nargs="?")
    f.add_argument("--generator", type=structure_arg, required=True)
    f.add_argument("--projections", action="store_true", help="use the projection minion instead of Pol(A, B)")
    f.add_argument("-o", "--output")
    f.set_defaults(func=cmd_free)

    k = sub.add_parser("check", help="property harnesses").add_subparsers(dest="check", required=True)
    a = k.add_parser("adjunction")
    a.add_argument("bundle", help="gadget bundle file, 'arc', or 'arc-graph' for the arc graph pair")
    a.add_argument("--random", type=int, default=100)
    a.add_argument("--max-size", type=int, default=4)
    a.add_argument("--density", type=float, default=0.3)
    a.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    a.set_defaults(func=cmd_check)

    w = sub.add_parser("show", help="print a built-in or file structure in the text format")
    w.add_argument("structure", type=structure_arg)
    w.add_argument("-o", "--output")
    w.set_defaults(func=cmd_show)
    return p


def run(argv: list[str]) -> CommandResult:
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = _dispatch(argv)
    return CommandResult(code, out.getvalue() + err.getvalue())


def _dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command == "free" and not args.projections and (args.a is None or args.b is None):
        print("free: give a template pair A B or --projections", file=sys.stderr)
        return EXIT_USAGE
    budget = default_budget().with_overrides(max_domain=args.max_domain, node_limit=args.node_limit,
                                             enumeration_cap=args.enum_cap)
    try:
        return args.func(args, budget)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (PCSPError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: list[str] | None = None) -> int:
    return _dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
