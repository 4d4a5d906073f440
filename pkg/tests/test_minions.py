import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minionlab.errors import ArityMismatch, MalformedInput, MembershipError
from minionlab.minions import (
    DictatorElement,
    MatrixElement,
    MinorMap,
    SkeletalElement,
    check_minion_axioms,
    check_minor_preserving,
    dictator_handle,
    dictator_into,
    element_from_doc,
    element_to_doc,
    is_sdp_member,
    random_minor_map,
    sample_sdp,
    sample_skeletal,
    sdp_handle,
    skeletal_handle,
    theta,
)
from minionlab.quantum import quantum_handle

PI = MinorMap.from_one_based((1, 1, 2), 2)


def test_dictator_minor_example():
    assert DictatorElement(3, 1).minor(PI) == DictatorElement(2, 0)


def test_linear_minor_example():
    rows = np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]])
    out = MatrixElement(rows).minor(PI)
    assert np.allclose(out.rows, [[0.4, 0.6], [0.5, 0.6]])


def test_empty_preimage_gives_zero_row():
    out = MatrixElement(np.array([[0.6], [0.8]])).minor(MinorMap(2, 3, (0, 0)))
    assert np.allclose(out.rows, [[1.4], [0.0], [0.0]])


def test_arity_mismatch():
    with pytest.raises((ArityMismatch, MalformedInput)):
        DictatorElement(2, 0).minor(PI)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_row_sum_rule_equals_matrix_product(seed):
    # row i of M_{/pi} is the sum over the preimage: M_{/pi} = P M with P[j, i] = [pi(i) = j]
    rng = np.random.default_rng(seed)
    ell, ell2 = int(rng.integers(1, 6)), int(rng.integers(1, 6))
    pi = random_minor_map(rng, ell, ell2)
    M = rng.normal(size=(ell, 3))
    P = np.zeros((ell2, ell))
    for i in range(ell):
        P[pi.map[i], i] = 1
    assert np.allclose(MatrixElement(M).minor(pi).rows, P @ M)


def test_minor_map_composition():
    a = MinorMap(3, 2, (0, 1, 1))
    b = MinorMap(2, 4, (3, 0))
    assert a.then(b).map == (3, 0, 0)
    assert MinorMap.identity(3).then(a) == a


@pytest.mark.parametrize("handle", [dictator_handle(), sdp_handle(False), sdp_handle(True), skeletal_handle(),
                                    quantum_handle(4), quantum_handle(3, field="real")],
                         ids=lambda h: h.name)
def test_minion_axioms(handle):
    rep = check_minion_axioms(handle, samples=200, seed=3)
    assert rep.ok, rep.to_doc()


def test_sdp_membership():
    assert is_sdp_member(MatrixElement(np.array([[0.6, 0.0], [0.0, 0.8]])))
    assert not is_sdp_member(MatrixElement(np.array([[0.6, 0.0], [0.8, 0.0]])))  # rows not orthogonal
    assert not is_sdp_member(MatrixElement(np.array([[1.0], [1.0]]) / 2))  # trace 1/2
    assert not is_sdp_member(MatrixElement(np.array([[1j]])), complex_ok=False)
    assert is_sdp_member(MatrixElement(np.array([[1j]])))


def test_skeletal_membership():
    half = Fraction(1, 2)
    good = SkeletalElement(2, [[1, 0], [half, half], [0, 1]])
    assert good.is_stochastic() and good.is_skeletal()
    no_witness = SkeletalElement(2, [[half, half]])
    assert no_witness.is_stochastic() and not no_witness.is_skeletal()
    # a zero row needs no witness
    assert SkeletalElement(3, [[1, 0, 0]]).is_skeletal()
    assert not SkeletalElement(2, [[1, 1]]).is_stochastic()


def test_skeletal_minor_exact():
    third = Fraction(1, 3)
    e = SkeletalElement(3, [[1, 0, 0], [0, 0, 1], [third, third, third]])
    out = e.minor(PI)
    assert out == SkeletalElement(2, [[1, 0], [0, 1], [2 * third, third]])
    assert out.is_skeletal() and out.is_stochastic()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_skeletal_minors_stay_in_minion(seed):
    rng = np.random.default_rng(seed)
    e = sample_skeletal(rng)
    pi = random_minor_map(rng, e.arity, int(rng.integers(1, 7)))
    out = e.minor(pi)
    assert out.is_stochastic() and out.is_skeletal()


def test_dictator_into_sdp_and_skeletal_examples():
    xi = dictator_into(sdp_handle(False))
    out = xi(DictatorElement(4, 2))
    assert np.allclose(out.rows, [[0], [0], [1], [0]])
    xc = dictator_into(skeletal_handle())
    assert xc(DictatorElement(3, 1)) == SkeletalElement(3, [[0, 1, 0]])
    assert xc(DictatorElement(1, 0)) == skeletal_handle().unary


@pytest.mark.parametrize("target", [sdp_handle(True), skeletal_handle(), quantum_handle(3), dictator_handle()],
                         ids=lambda h: h.name)
def test_dictator_into_preserves_minors(target):
    xi = dictator_into(target, np.random.default_rng(1))
    rep = check_minor_preserving(xi, dictator_handle(), samples=200, seed=5, equal=target.equal)
    assert rep.ok, rep.to_doc()


def test_theta_examples():
    out = theta(MatrixElement(np.array([[1j]])))
    assert np.allclose(out.rows, [[0.0, 1.0]])
    s = 1 / math.sqrt(2)
    out = theta(MatrixElement(np.array([[(1 + 1j) * s]])))
    assert np.allclose(out.rows, [[s, s]])
    real = MatrixElement(np.array([[0.6, 0.0], [0.0, 0.8]]))
    out = theta(real)
    assert np.allclose(out.rows, [[0.6, 0.0, 0.0, 0.0], [0.0, 0.8, 0.0, 0.0]])
    assert is_sdp_member(out, complex_ok=False)


def test_theta_rejects_non_members():
    with pytest.raises(MembershipError):
        theta(MatrixElement(np.array([[1.0], [1.0]])))


def test_theta_on_samples():
    rng = np.random.default_rng(11)
    for _ in range(100):
        M = sample_sdp(rng, complex_field=True)
        out = theta(M)
        assert out.rows.dtype.kind == "f"
        assert is_sdp_member(out, complex_ok=False)
    rep = check_minor_preserving(theta, sdp_handle(True), samples=200, seed=2)
    assert rep.ok


def test_corrupted_map_is_caught():
    def swapped(M):
        rows = M.rows.copy()
        if rows.shape[0] >= 2:
            rows[[0, 1]] = rows[[1, 0]]
        return MatrixElement(rows)

    rep = check_minor_preserving(swapped, sdp_handle(False), samples=200, seed=4)
    assert not rep.ok


def test_identity_on_dictator_is_minor_preserving():
    assert check_minor_preserving(lambda e: e, dictator_handle(), samples=300, seed=0).ok


@pytest.mark.parametrize("element", [
    DictatorElement(3, 2),
    MatrixElement(np.array([[0.6, 0.0], [0.0, 0.8]])),
    MatrixElement(np.array([[0.6j, 0.0], [0.0, 0.8]])),
    SkeletalElement(2, [[1, 0], [Fraction(1, 3), Fraction(2, 3)]]),
])
def test_element_json_round_trip(element):
    doc = json.loads(json.dumps(element_to_doc(element)))
    back = element_from_doc(doc)
    if isinstance(element, MatrixElement):
        assert np.array_equal(back.rows, element.rows)
    else:
        assert back == element
    assert element_to_doc(back) == doc


def test_dictator_doc_is_one_based():
    assert element_to_doc(DictatorElement(3, 0)) == {"kind": "dictator", "arity": 3, "index": 1}


def test_all_small_minor_maps_compose():
    e = SkeletalElement(3, [[1, 0, 0], [0, 1, 0], [Fraction(1, 2), 0, Fraction(1, 2)]])
    for m1 in itertools.product(range(2), repeat=3):
        for m2 in itertools.product(range(3), repeat=2):
            p1, p2 = MinorMap(3, 2, m1), MinorMap(2, 3, m2)
            assert e.minor(p1).minor(p2) == e.minor(p1.then(p2))
