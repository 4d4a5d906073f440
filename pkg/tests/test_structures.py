import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minionlab.errors import MalformedInput, SignatureMismatch, SizeCapExceeded
from minionlab.structures import (
    GRAPH_SIGNATURE,
    Homomorphism,
    Structure,
    all_homomorphisms,
    arc_consistency,
    decode_index,
    direct_power,
    encode_tuple,
    enumerate_polymorphisms,
    find_homomorphism,
    function_minor,
    is_bipartite,
    is_homomorphism,
    structure_from_dict,
    structure_to_dict,
    zoo,
    zoo_ref,
)

from conftest import brute_homs, random_structure, random_ternary


@pytest.mark.parametrize("a,b", [("C5", "K2"), ("C5", "K3"), ("K4", "K3"), ("P4", "K2"),
                                 ("C6", "K2"), ("C7", "C5"), ("K3", "C5"), ("Z", "Z'"), ("Z'", "Z")])
def test_all_homomorphisms_matches_brute_force(a, b):
    X, Y = zoo_ref(a), zoo_ref(b)
    assert all_homomorphisms(X, Y) == brute_homs(X, Y)


def test_known_hom_examples():
    assert find_homomorphism(zoo_ref("C5"), zoo_ref("K2")).status == "none-proven"
    res = find_homomorphism(zoo_ref("C5"), zoo_ref("K3"))
    assert res.found and is_homomorphism(zoo_ref("C5"), zoo_ref("K3"), res.homomorphism.map)
    assert len(all_homomorphisms(zoo_ref("K3"), zoo_ref("K3"))) == 6


def test_budget_exceeded_is_reported():
    res = find_homomorphism(zoo_ref("K4"), zoo_ref("K3"), budget=1)
    assert res.status == "budget-exceeded"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_search_agrees_with_brute_force_on_random_graphs(seed):
    rng = np.random.default_rng(seed)
    X = random_structure(rng, int(rng.integers(1, 7)), int(rng.integers(0, 10)))
    Y = random_structure(rng, int(rng.integers(1, 4)), int(rng.integers(0, 6)))
    homs = brute_homs(X, Y)
    assert all_homomorphisms(X, Y) == homs
    assert find_homomorphism(X, Y).found == bool(homs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_search_agrees_with_brute_force_on_ternary(seed):
    rng = np.random.default_rng(seed)
    X = random_ternary(rng, int(rng.integers(1, 6)), int(rng.integers(0, 6)))
    Y = random_ternary(rng, int(rng.integers(1, 3)), int(rng.integers(0, 5)))
    assert all_homomorphisms(X, Y) == brute_homs(X, Y)


def test_arc_consistency_is_sound():
    # every homomorphism survives the pruned domains
    X, Y = zoo_ref("C6"), zoo_ref("K3")
    doms = arc_consistency(X, Y)
    for f in brute_homs(X, Y):
        assert all(f[v] in doms[v] for v in range(X.domain_size))
    # arc consistency cannot see odd cycles, but it does see a loop
    assert arc_consistency(zoo_ref("K3"), zoo_ref("K2")) is not None
    loop = Structure(GRAPH_SIGNATURE, 1, {"E": {(0, 0)}})
    assert arc_consistency(loop, zoo_ref("K2")) is None


def test_signature_mismatch():
    with pytest.raises(SignatureMismatch):
        find_homomorphism(zoo_ref("K3"), zoo_ref("Z"))


def test_bad_homomorphism_rejected():
    with pytest.raises(MalformedInput):
        Homomorphism(zoo_ref("K3"), zoo_ref("K2"), (0, 1, 0))


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_encode_decode_round_trip(n, ell, data):
    idx = data.draw(st.integers(0, n**ell - 1))
    vals = decode_index(idx, n, ell)
    assert len(vals) == ell and encode_tuple(vals, n) == idx


def test_direct_power_of_k2():
    P = direct_power(zoo_ref("K2"), 2)
    assert P.domain_size == 4
    # (a,b) ~ (c,d) iff a != c and b != d: a perfect matching 00-11, 01-10
    expected = set()
    for u, v in itertools.product(range(4), repeat=2):
        a, b = decode_index(u, 2, 2)
        c, d = decode_index(v, 2, 2)
        if a != c and b != d:
            expected.add((u, v))
    assert P.relations["E"] == expected
    assert len(expected) == 4


def test_direct_power_cap():
    with pytest.raises(SizeCapExceeded):
        direct_power(zoo_ref("K4"), 5, cap=100)


def _brute_polymorphisms(Y, ell, Y2=None):
    Y2 = Y2 or Y
    pts = list(itertools.product(range(Y.domain_size), repeat=ell))
    rels = []
    for sym, arity in Y.signature.symbols:
        for rows in itertools.product(sorted(Y.relations[sym]), repeat=ell):
            # columns of the ell x arity matrix are points of Y^ell forming a tuple
            cols = [tuple(rows[i][k] for i in range(ell)) for k in range(arity)]
            rels.append((sym, [pts.index(c) for c in cols]))
    out = []
    for f in itertools.product(range(Y2.domain_size), repeat=len(pts)):
        if all(tuple(f[i] for i in idx) in Y2.relations[sym] for sym, idx in rels):
            out.append(f)
    return out


@pytest.mark.parametrize("name,ell,count", [("K3", 1, 6), ("K2", 2, 4), ("K2", 3, 16), ("K3", 2, 12)])
def test_polymorphism_counts(name, ell, count):
    Y = zoo_ref(name)
    ps = enumerate_polymorphisms(Y, ell=ell)
    assert len(ps) == count
    assert list(ps.functions) == _brute_polymorphisms(Y, ell)


def test_promise_polymorphisms_match_brute_force():
    Y, Y2 = zoo_ref("Z"), zoo_ref("Z'")
    assert list(enumerate_polymorphisms(Y, Y2, ell=2).functions) == _brute_polymorphisms(Y, 2, Y2)


def test_k3_ternary_polymorphisms_are_essentially_unary():
    ps = enumerate_polymorphisms(zoo_ref("K3"), ell=3)
    assert len(ps) == 18
    for f in ps.functions:
        ess = [i for i in range(3)
               if any(f[encode_tuple(s, 3)] != f[encode_tuple(s[:i] + (v,) + s[i + 1:], 3)]
                      for s in itertools.product(range(3), repeat=3) for v in range(3))]
        assert len(ess) == 1


def _maps(ell, ell2):
    return list(itertools.product(range(ell2), repeat=ell))


def test_minors_of_polymorphisms_are_polymorphisms_and_compose():
    Y = zoo_ref("K2")
    n = 2
    by_arity = {ell: set(enumerate_polymorphisms(Y, ell=ell).functions) for ell in (1, 2, 3)}
    for f in by_arity[3]:
        for pi in _maps(3, 2):
            g = function_minor(f, n, 3, pi, 2)
            assert g in by_arity[2]
            for sigma in _maps(2, 1):
                h1 = function_minor(g, n, 2, sigma, 1)
                comp = tuple(sigma[pi[i]] for i in range(3))
                assert h1 == function_minor(f, n, 3, comp, 1)


def test_identity_minor():
    f = enumerate_polymorphisms(zoo_ref("K2"), ell=3).functions[5]
    assert function_minor(f, 2, 3, (0, 1, 2), 3) == f


def test_bipartite():
    res = is_bipartite(zoo_ref("C4"))
    assert res.bipartite
    E = zoo_ref("C4").relations["E"]
    assert all(res.coloring[a] != res.coloring[b] for a, b in E)
    odd = is_bipartite(zoo_ref("C5"))
    assert not odd.bipartite
    walk = odd.odd_walk
    assert len(walk) % 2 == 1
    E5 = zoo_ref("C5").relations["E"]
    assert all((walk[i], walk[(i + 1) % len(walk)]) in E5 for i in range(len(walk)))


@pytest.mark.parametrize("name", ["K2", "K3", "C5", "P4", "Z", "Z'", "nae"])
def test_structure_json_round_trip(name):
    S = zoo_ref(name)
    doc = structure_to_dict(S)
    again = structure_from_dict(json.loads(json.dumps(doc)))
    assert again == S
    assert structure_to_dict(again) == doc


def test_zoo_contents():
    assert zoo_ref("Z").relations["R"] == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}
    assert len(zoo_ref("Z'").relations["R"]) == 6
    assert zoo("cycle", 5) == zoo_ref("C5")
    assert zoo_ref("P3").domain_size == 3
    with pytest.raises(ValueError):
        zoo_ref("Q7")


def test_malformed_structures():
    with pytest.raises(MalformedInput):
        Structure(GRAPH_SIGNATURE, 2, {"E": {(0, 2)}})
    with pytest.raises(MalformedInput):
        Structure(GRAPH_SIGNATURE, 2, {"E": {(0, 1, 1)}})
    with pytest.raises(MalformedInput):
        structure_from_dict({"domain": 2})
