import itertools
import random

import pytest

from pcsplab import Signature, Structure, are_isomorphic, builtin, find_homomorphism, is_homomorphism
from pcsplab.errors import BudgetExceeded, MalformedGadget, ParseError, SignatureMismatch
from pcsplab.config import Budget
from pcsplab.reductions import (GadgetData, PromiseViolation, UnionFind, apply_gadget_replacement, arc_gadget,
                                arc_graph, arc_graph_right_adjoint, check_adjunction, check_arc_adjunction,
                                identity_gadget, k_reduction, k_reduction_plan, parse_gadget_bundle, pp_power,
                                random_structure, serialize_gadget_bundle)
from oracles import brute_hom_exists, brute_isomorphic

EDGE = Signature((("E", 2),))


def digraph(n, edges, name="G"):
    return Structure.build(name, n, EDGE, {"E": edges})


def test_union_find_orders_classes_by_smallest_member():
    uf = UnionFind(5)
    uf.union(4, 1)
    uf.union(3, 0)
    assert uf.classes() == [0, 1, 2, 0, 1]


# -- gadget replacement --------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 7))
def test_arc_gadget_extends_paths(n):
    out = apply_gadget_replacement(arc_gadget(), builtin(f"P{n}"))
    assert brute_isomorphic(out, builtin(f"P{n + 1}"))


def test_arc_gadget_on_p1_is_p2_exactly():
    assert apply_gadget_replacement(arc_gadget(), builtin("P1")).same_content(builtin("P2"))


def test_bidirected_triangle_collapses():
    out = apply_gadget_replacement(arc_gadget(), builtin("UC3"))
    assert out.domain_size == 1 and out.relation("E") == ((0, 0),)


def test_two_cycle_becomes_two_cycle():
    # edges a = (0,1), b = (1,0): head of a glues to tail of b and back
    out = apply_gadget_replacement(arc_gadget(), builtin("K2"))
    assert brute_isomorphic(out, builtin("C2"))


def test_gadget_on_isomorphic_inputs():
    rng = random.Random(1)
    for _ in range(40):
        n = rng.randint(1, 5)
        g = random_structure(rng, EDGE, n, 0.3)
        perm = list(range(n))
        rng.shuffle(perm)
        h = digraph(n, [(perm[a], perm[b]) for a, b in g.relation("E")])
        assert are_isomorphic(apply_gadget_replacement(arc_gadget(), g),
                              apply_gadget_replacement(arc_gadget(), h))


def test_identity_gadget_is_identity():
    sig = Signature((("E", 2), ("U", 1)))
    idg = identity_gadget(sig)
    rng = random.Random(4)
    for _ in range(20):
        s = random_structure(rng, sig, rng.randint(1, 4), 0.4)
        assert apply_gadget_replacement(idg, s).same_content(s)
        assert pp_power(idg, s).same_content(s)
        assert check_adjunction(idg, s, s)


def test_malformed_gadget():
    g = arc_gadget()
    with pytest.raises(MalformedGadget):
        GadgetData(g.source, g.variable, g.constraints, {("E", 1): (0, 1), ("E", 2): (2, 1)})
    with pytest.raises(MalformedGadget):
        GadgetData(g.source, g.variable, g.constraints, {("E", 1): (0, 1)})


def test_signature_mismatch():
    with pytest.raises(SignatureMismatch):
        apply_gadget_replacement(arc_gadget(), builtin("T"))


# -- pp-power -------------------------------------------------------------------

def test_pp_power_examples():
    assert brute_isomorphic(pp_power(arc_gadget(), builtin("C3")), builtin("C3"))
    r = pp_power(arc_gadget(), builtin("P1"))
    assert r.domain_size == 1 and r.relation("E") == ()


def test_arc_adjunction_spot_check():
    assert check_adjunction(arc_gadget(), builtin("P3"), builtin("C3"))


def test_gadget_adjunction_harness():
    rng = random.Random(0)
    g = arc_gadget()
    for _ in range(150):
        i = random_structure(rng, EDGE, rng.randint(1, 4), 0.3)
        b = random_structure(rng, EDGE, rng.randint(1, 4), 0.3)
        assert check_adjunction(g, i, b)
        # the two sides against brute force
        assert brute_hom_exists(i, pp_power(g, b)) == brute_hom_exists(apply_gadget_replacement(g, i), b)


# -- bundle files ---------------------------------------------------------------

def test_bundle_roundtrip():
    g = arc_gadget()
    again = parse_gadget_bundle(serialize_gadget_bundle(g))
    assert again.variable.same_content(g.variable)
    assert again.constraints["E"].same_content(g.constraints["E"])
    assert dict(again.embeddings) == dict(g.embeddings)


def test_bundle_errors():
    with pytest.raises(ParseError):
        parse_gadget_bundle("variable structure G { domain 1; relation E/2 = { }; }")
    text = serialize_gadget_bundle(arc_gadget()).replace("e E 2 : 1 2", "e E 2 : 2 0")
    with pytest.raises(MalformedGadget):
        parse_gadget_bundle(text)


# -- arc graphs -------------------------------------------------------------------

def delta_oracle(g):
    edges = list(g.relation("E"))
    arcs = [(m, n) for m, e in enumerate(edges) for n, f in enumerate(edges) if e[1] == f[0]]
    return digraph(len(edges), arcs)


def delta_r_oracle(h):
    n = h.domain_size
    subsets = [frozenset(v for v in range(n) if m >> v & 1) for m in range(2 ** n)]
    e = set(h.relation("E"))
    arcs = [(a, b) for a, U in enumerate(subsets) for b, V in enumerate(subsets)
            if any(all((u, v) in e for v in V) for u in U)]
    return digraph(2 ** n, arcs)


def test_arc_graph_examples():
    assert brute_isomorphic(arc_graph(builtin("P2")), builtin("P1"))
    for n in range(3, 7):
        assert brute_isomorphic(arc_graph(builtin(f"C{n}")), builtin(f"C{n}"))
    loop = digraph(1, [(0, 0)])
    assert arc_graph(loop).same_content(loop)


def test_arc_graph_matches_oracle():
    rng = random.Random(8)
    for _ in range(60):
        g = random_structure(rng, EDGE, rng.randint(1, 4), 0.35)
        assert arc_graph(g).relations == delta_oracle(g).relations
        h = random_structure(rng, EDGE, rng.randint(1, 3), 0.4)
        assert arc_graph_right_adjoint(h).relations == delta_r_oracle(h).relations


def test_right_adjoint_of_loop():
    r = arc_graph_right_adjoint(digraph(1, [(0, 0)]))
    assert r.domain_size == 2
    # vertex 0 is the empty set, vertex 1 is {v}
    assert r.relation("E") == ((1, 0), (1, 1))


def test_right_adjoint_budget():
    with pytest.raises(BudgetExceeded):
        arc_graph_right_adjoint(builtin("C5"), Budget(max_domain=16))


def test_arc_adjunction_harness():
    rng = random.Random(12)
    for _ in range(100):
        g = random_structure(rng, EDGE, rng.randint(1, 4), 0.3)
        h = random_structure(rng, EDGE, rng.randint(1, 3), 0.4)
        assert check_arc_adjunction(g, h)


# -- k-reduction ------------------------------------------------------------------

def planted(rng, n, count):
    t = builtin("T")
    h = [rng.randint(0, 1) for _ in range(n)]
    tuples = [x for x in itertools.product(range(n), repeat=3) if tuple(h[v] for v in x) in t.relation("R")]
    rng.shuffle(tuples)
    return Structure.build("I", n, t.signature, {"R": tuples[:count]})


def test_promise_violation_on_loop_triple():
    t = builtin("T")
    i = Structure.build("I", 2, t.signature, {"R": [(0, 0, 0), (0, 1, 1)]})
    for k in (1, 2, 3):
        assert k_reduction(t, t, k, i) == PromiseViolation((0,))


def test_restrictions_commute():
    t = builtin("T")
    rng = random.Random(6)
    i = planted(rng, 4, 5)
    plan = k_reduction_plan(t, t, 3, i)
    for K in plan.subsets:
        for L in plan.subsets:
            for M in plan.subsets:
                if set(L) < set(M) < set(K):
                    direct = plan.restrictions[(L, K)]
                    via = [plan.restrictions[(L, M)][x] for x in plan.restrictions[(M, K)]]
                    assert direct == via


@pytest.mark.parametrize("include_empty", [True, False])
def test_evaluation_map_witness(include_empty):
    t = builtin("T")
    rng = random.Random(21)
    for _ in range(10):
        i = planted(rng, rng.randint(2, 4), rng.randint(1, 4))
        plan = k_reduction_plan(t, t, 2, i, include_empty=include_empty)
        h = find_homomorphism(i, t)
        assert is_homomorphism(plan.evaluation_map(h), plan.structure, t)


def test_full_k_contains_top_gadget():
    t = builtin("T")
    i = Structure.build("I", 3, t.signature, {"R": [(0, 1, 2)]})
    plan = k_reduction_plan(t, t, 3, i)
    top = (0, 1, 2)
    assert len(plan.homs[top]) == 3
    # every element is identified into the top gadget copy
    top_classes = {plan.classes[plan.offsets[top] + x] for x in range(2 ** 3)}
    assert top_classes == set(range(plan.structure.domain_size))
