import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcsplab import Structure, are_isomorphic, builtin, homomorphism_exists, is_homomorphism, power
from pcsplab.errors import ArityMismatch, MalformedSelection, MissingArity, WrongTemplate
from pcsplab.minions import (ArityWindowMismatch, ChainOfMinors, FunctionTable, MinorMap, Pol, Projections,
                             all_minor_maps, candidate_selections, check_chain_selection, check_condition,
                             classify_table, count_polymorphisms, enumerate_polymorphisms,
                             essential_coordinates, essential_selection, is_parity_symmetric, find_selection, free_structure,
                             free_structure_evaluation, is_trivial_condition, MinionSlice, is_window_homomorphism, minor,
                             minor_closure, parse_condition, polymorphism_slice, projection,
                             projection_slice, satisfies, search_minion_homomorphism, solve_condition,
                             trivial_witness, verify_trash_representation, wnu3)
from oracles import brute_homs


def first_s():
    return FunctionTable.from_callable(lambda x, y: x, 2, 3, 6)


def wnu_n():
    def n(x, y, z):
        for a in (x, y, z):
            if (x, y, z).count(a) >= 2:
                return a
        return x + 3
    return FunctionTable.from_callable(n, 3, 3, 6)


# -- tables and minors ------------------------------------------------------

def test_table_matches_power_encoding():
    f = FunctionTable.from_callable(lambda x, y: (x + 2 * y) % 3, 2, 3, 3)
    for idx, args in enumerate(itertools.product(range(3), repeat=2)):
        assert f.values[idx] == f(*args)


def test_minor_examples():
    p1 = projection(2, 1, 3)
    assert minor(p1, MinorMap.of((1, 1))) == projection(1, 1, 3)
    assert minor(wnu_n(), MinorMap.of((1, 1, 2))) == first_s()


def test_minor_arity_mismatch():
    with pytest.raises(ArityMismatch):
        minor(projection(2, 1, 2), MinorMap.of((1, 2, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(2, 3), st.data())
def test_minor_composition(m, size, data):
    n = data.draw(st.integers(1, 3))
    k = data.draw(st.integers(1, 3))
    vals = tuple(data.draw(st.lists(st.integers(0, size - 1), min_size=size ** m, max_size=size ** m)))
    g = FunctionTable(m, size, size, vals)
    p = MinorMap(m, n, tuple(data.draw(st.lists(st.integers(1, n), min_size=m, max_size=m))))
    q = MinorMap(n, k, tuple(data.draw(st.lists(st.integers(1, k), min_size=n, max_size=n))))
    assert minor(minor(g, p), q) == minor(g, p.then(q))
    # direct definition
    f = minor(g, p)
    for x in itertools.product(range(size), repeat=n):
        assert f(*x) == g(*(x[j - 1] for j in p.pi))


def test_permutation_inverse_roundtrip():
    g = FunctionTable.from_callable(lambda x, y, z: (x + 2 * y * z) % 3, 3, 3, 3)
    pi = MinorMap.of((3, 1, 2))
    assert minor(minor(g, pi), pi.inverse()) == g


# -- enumeration --------------------------------------------------------------

@pytest.mark.parametrize("a,b,n,expected", [("K3", "K3", 1, 6), ("T", "H2", 1, 2), ("K2", "K2", 2, 4),
                                             ("K3", "K4", 1, 24)])
def test_small_counts(a, b, n, expected):
    a, b = builtin(a), builtin(b)
    assert count_polymorphisms(a, b, n) == expected
    assert len(enumerate_polymorphisms(a, b, n).at(n)) == expected
    assert expected == len(brute_homs(power(a, n), b))


def test_slice_is_valid_and_minor_closed():
    sl = polymorphism_slice(builtin("T"), builtin("H2"), (1, 2, 3))
    assert sl.minor_closed()
    for f in sl.tables():
        assert f.is_polymorphism(builtin("T"), builtin("H2"))
    assert list(sl.at(2)) == sorted(sl.at(2))
    with pytest.raises(MissingArity):
        sl.at(4)


def test_pol_sat3_is_projections():
    sat = builtin("SAT3")
    for n in (1, 2, 3):
        assert set(Pol(sat, sat).elements(n)) == {projection(n, i, 2) for i in range(1, n + 1)}


# -- classification ----------------------------------------------------------

def test_classify_first_s():
    c = classify_table(first_s())
    assert not c.symmetric and c.essential_coords == frozenset({1})


def test_classify_parity():
    c = classify_table(FunctionTable.from_callable(lambda x, y, z: (x + y + z) % 2, 3, 2, 2))
    assert c.symmetric and c.parity_symmetric and c.cancellation and c.alternating
    assert c.essential_coords == frozenset({1, 2, 3})


def test_constant_has_no_essential_coordinates():
    f = FunctionTable.from_callable(lambda *x: 1, 3, 2, 2)
    assert essential_coordinates(f) == frozenset()


def test_even_arity_flags_false():
    c = classify_table(FunctionTable.from_callable(lambda x, y: 0, 2, 2, 2))
    assert c.symmetric and not c.parity_symmetric and not c.alternating


def test_majority_not_cancellative():
    maj = FunctionTable.from_callable(lambda x, y, z: int(x + y + z >= 2), 3, 2, 2)
    c = classify_table(maj)
    assert c.symmetric and not c.cancellation


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([3, 5]), st.integers(2, 3), st.data())
def test_symmetric_implies_parity_symmetric_implies_even(arity, size, data):
    if size ** arity > 300:
        arity = 3
    # build from multisets so symmetry shows up often
    ms = {}
    vals = []
    for x in itertools.product(range(size), repeat=arity):
        key = tuple(sorted(x)) if data.draw(st.booleans()) else x
        if key not in ms:
            ms[key] = data.draw(st.integers(0, size - 1))
        vals.append(ms[key])
    f = FunctionTable(arity, size, size, tuple(vals))
    c = classify_table(f)
    if c.symmetric:
        assert c.parity_symmetric
    arr = f.array()
    odd, even = list(range(0, arity, 2)), list(range(1, arity, 2))
    for perm in itertools.permutations(range(arity)):
        inversions = sum(perm[i] > perm[j] for i in range(arity) for j in range(i + 1, arity))
        fixed = np.array_equal(arr, np.transpose(arr, perm))
        if c.symmetric:
            assert fixed
        if c.parity_symmetric and all(perm[i] % 2 == i % 2 for i in range(arity)):
            assert fixed
        if c.symmetric and inversions % 2 == 0:
            assert fixed


def test_parity_symmetric_need_not_be_even_invariant():
    f = FunctionTable.from_callable(lambda x, y, z: y, 3, 2, 2)
    assert is_parity_symmetric(f)
    assert minor(f, MinorMap.of((2, 3, 1))) != f


# -- minor conditions ---------------------------------------------------------

def test_parse_condition_and_errors():
    c = parse_condition("symbols: n/3, s/2; n(x,x,y) = s(x,y); # trailing comment\n n(y,x,x) = s(x,y);")
    assert c.arity("n") == 3 and len(c.identities) == 2
    with pytest.raises(ValueError):
        parse_condition("symbols: f/2; f(x) = f(x,y);")
    with pytest.raises(ValueError):
        parse_condition("symbols: f/2; g(x,y) = f(x,y);")


def test_wnu_triviality():
    w = wnu3()
    assert not is_trivial_condition(w)
    for i in range(3):
        assert is_trivial_condition(w.without(i))
    assert is_trivial_condition(parse_condition("symbols: f/2;"))
    assert trivial_witness(w.without(0)) is not None


def test_explicit_wnu_pair():
    s, n = first_s(), wnu_n()
    k3, k6 = builtin("K3"), builtin("K6")
    assert s.is_polymorphism(k3, k6) and n.is_polymorphism(k3, k6)
    assert satisfies(wnu3(), {"n": n, "s": s})


def test_condition_on_closure_window():
    window = minor_closure([first_s(), wnu_n()], (2, 3))
    w = check_condition(wnu3(), window)
    assert w is not None and satisfies(wnu3(), w)


def test_swap_identity_fixed_g():
    g = FunctionTable.from_callable(lambda x, y: (x + 2 * y) % 3, 2, 3, 3)
    cond = parse_condition("symbols: f/2, g/2; f(x,y) = g(y,x);")
    window = MinionSlice({2: tuple(sorted({g, minor(g, MinorMap.of((2, 1)))}))})
    w = check_condition(cond, window)
    assert w is not None and satisfies(cond, w)


def test_missing_arity():
    with pytest.raises(MissingArity):
        check_condition(wnu3(), projection_slice(2, (3,)))


@pytest.mark.parametrize("a,b", [("T", "H2"), ("K2", "K3"), ("K2", "K2"), ("H2", "H2")])
def test_csp_route_equals_exhaustive(a, b):
    a, b = builtin(a), builtin(b)
    window = polymorphism_slice(a, b, (2, 3))
    for cond in (wnu3(), wnu3().without(1), parse_condition("symbols: f/2; f(x,y) = f(y,x);"),
                 parse_condition("symbols: m/3; m(x,x,y) = m(x,y,x); m(x,y,x) = m(y,x,x);")):
        assert solve_condition(cond, a, b) == check_condition(cond, window)


def test_wnu_fails_in_pol_h2_h3():
    a, b = builtin("H2"), builtin("H3")
    assert check_condition(wnu3(), polymorphism_slice(a, b, (2, 3))) is None
    assert solve_condition(wnu3(), a, b) is None


# -- minion homomorphisms ----------------------------------------------------

def test_projections_map_into_pol():
    src = projection_slice(2, (1, 2, 3))
    dst = polymorphism_slice(builtin("T"), builtin("H2"), (1, 2, 3))
    xi = search_minion_homomorphism(src, dst)
    assert xi is not None and xi.evidence == "bounded"
    assert is_window_homomorphism(xi.mapping, src, dst)


def test_wnu_window_has_no_map_to_projections():
    src = minor_closure([first_s(), wnu_n()], (1, 2, 3))
    assert src.minor_closed()
    assert search_minion_homomorphism(src, projection_slice(6, (1, 2, 3))) is None


def test_identity_map_is_a_witness():
    sl = polymorphism_slice(builtin("K2"), builtin("K3"), (1, 2))
    xi = search_minion_homomorphism(sl, sl)
    assert xi is not None and is_window_homomorphism({f: f for f in sl.tables()}, sl, sl)


def test_window_mismatch():
    with pytest.raises(ArityWindowMismatch):
        search_minion_homomorphism(projection_slice(2, (1, 2)), projection_slice(2, (1, 2, 3)))


def test_homomorphism_preserves_conditions():
    src = minor_closure([first_s(), wnu_n()], (1, 2, 3))
    # Pol(K2, K2) holds x+y+z mod 2, a WNU, so a window map exists
    dst = polymorphism_slice(builtin("K2"), builtin("K2"), (1, 2, 3))
    w = check_condition(wnu3(), src)
    xi = search_minion_homomorphism(src, dst)
    assert xi is not None and is_window_homomorphism(xi.mapping, src, dst)
    assert satisfies(wnu3(), {k: xi[v] for k, v in w.items()})


# -- trash colours ------------------------------------------------------------

def test_trash_unary_inclusion():
    r = verify_trash_representation(FunctionTable.from_callable(lambda x: x, 1, 3, 4))
    assert r.coordinate == 1 and r.alpha == (0, 1, 2) and r.trash == 0


def test_trash_fails_for_sum_table():
    f = FunctionTable.from_callable(lambda x, y: (x + y) % 3, 2, 3, 4)
    assert verify_trash_representation(f) is None
    assert not f.is_polymorphism(builtin("K3"), builtin("K4"))


def test_trash_wrong_template():
    with pytest.raises(WrongTemplate):
        verify_trash_representation(projection(2, 1, 3))


# -- chains and selections ---------------------------------------------------

def or2():
    return FunctionTable.from_callable(lambda x, y: x | y, 2, 2, 2)


def test_identity_chain_always_passes():
    t = projection(2, 1, 2)
    chain = ChainOfMinors.iterate(t, MinorMap.identity(2), 1)
    for sel in candidate_selections(chain.tables, 2):
        assert check_chain_selection(chain, sel, 2)


def test_swap_chain_refutes_every_selection():
    t0 = or2()
    assert t0.is_polymorphism(builtin("T"), builtin("H2")) and classify_table(t0).symmetric
    chain = ChainOfMinors.iterate(t0, MinorMap.of((2, 1)), 1)
    sels = list(candidate_selections(chain.tables, 1))
    assert len(sels) == 2
    assert not any(check_chain_selection(chain, s, 1) for s in sels)
    assert find_selection([chain], 1) is None


def test_essential_selection_on_projection_chain():
    rng = random.Random(3)
    for _ in range(30):
        n = rng.randint(1, 4)
        tables = [projection(n, rng.randint(1, n), 2)]
        maps = []
        for _ in range(3):
            m = rng.randint(1, 4)
            pi = MinorMap(tables[-1].arity, m, tuple(rng.randint(1, m) for _ in range(tables[-1].arity)))
            maps.append(pi)
            tables.append(minor(tables[-1], pi))
        chain = ChainOfMinors(tuple(tables), tuple(maps))
        assert check_chain_selection(chain, essential_selection(chain.tables), 1)


def test_chain_composite_order():
    rng = random.Random(5)
    g = FunctionTable(3, 2, 2, tuple(rng.randint(0, 1) for _ in range(8)))
    p, q = MinorMap.of((2, 1, 2), 2), MinorMap.of((3, 3), 3)
    chain = ChainOfMinors((g, minor(g, p), minor(minor(g, p), q)), (p, q))
    assert minor(g, chain.composite(0, 2)) == chain.tables[2]


def test_malformed_selection():
    chain = ChainOfMinors.iterate(or2(), MinorMap.of((2, 1)), 1)
    with pytest.raises(MalformedSelection):
        check_chain_selection(chain, {or2(): frozenset({1, 2})}, 1)
    with pytest.raises(MalformedSelection):
        check_chain_selection(chain, {or2(): frozenset({3})}, 1)
    with pytest.raises(ValueError):
        ChainOfMinors((or2(), projection(2, 1, 2)), (MinorMap.of((2, 1)),))


# -- free structures ---------------------------------------------------------

@pytest.mark.parametrize("name", ["K3", "C3", "T", "P2"])
def test_free_structure_of_projections(name):
    a = builtin(name)
    f = free_structure(Projections(a.domain_size), a)
    assert are_isomorphic(f, a)


def test_free_structure_of_pol_t_h2():
    t, h2 = builtin("T"), builtin("H2")
    f = free_structure((t, h2), t)
    assert homomorphism_exists(f, h2)
    ev = free_structure_evaluation(Pol(t, h2).elements(2), (0, 1))
    assert is_homomorphism(ev, f, h2)


def test_free_structure_empty_relations():
    g = Structure.build("G", 2, (("R", 3),), {"R": []})
    f = free_structure((builtin("T"), builtin("H2")), g)
    assert f.relations == ((),)
