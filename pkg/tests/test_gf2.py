import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fragmentia.gf2 import (
    EchelonBasis,
    GF2Subspace,
    PauliString,
    SymplecticMatrix,
    closure,
    embed,
    intersection,
    matrix_order,
    project_to_sites,
    rank,
    reduce_basis,
    restrict_subspace,
    subspace_sum,
    symplectic_check,
    symplectic_product,
)
from fragmentia.clifford import enumerate_sp4


@pytest.mark.parametrize("a,b,expected", [
    ("+X", "+Z", "-iY"),
    ("+Z", "+X", "+iY"),
    ("+Y", "+Y", "+I"),
    ("+XZ", "+ZX", "+YY"),
])
def test_pauli_products(a, b, expected):
    assert (PauliString.from_label(a) * PauliString.from_label(b)).label() == expected


def test_pauli_product_matches_matrices(rng):
    for _ in range(50):
        n = 3
        a = PauliString(n, int(rng.integers(64)), int(rng.integers(4)))
        b = PauliString(n, int(rng.integers(64)), int(rng.integers(4)))
        assert np.allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix())


def test_commutation_is_symplectic_product(rng):
    for _ in range(50):
        a = PauliString(2, int(rng.integers(16)))
        b = PauliString(2, int(rng.integers(16)))
        ma, mb = a.to_matrix(), b.to_matrix()
        commute = np.allclose(ma @ mb, mb @ ma)
        assert commute == (symplectic_product(a.bits, b.bits) == 0) == a.commutes(b)


def test_hermitian_and_restrict():
    p = PauliString.from_label("-XYZ")
    assert p.is_hermitian() and p.weight() == 3
    assert p.restrict([1]).label() == "-Y"
    assert p.restrict([0, 2]).label() == "-XZ"


def test_label_roundtrip():
    for lab in ["+I", "-XYZI", "+iZZ", "-iYX"]:
        assert PauliString.from_label(lab).label() == lab


def test_symplectic_check_examples():
    assert symplectic_check(SymplecticMatrix.identity(3))
    assert symplectic_check(SymplecticMatrix.J(2))
    assert not symplectic_check(SymplecticMatrix.from_columns([1, 1]))
    with pytest.raises(ValueError):
        symplectic_check(np.zeros((3, 3), dtype=int))


def test_sp4_brute_force_oracle():
    """Every 4x4 binary matrix tested directly against M J M^T = J."""
    J = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    found = set()
    for code in range(1 << 16):
        m = np.array([(code >> i) & 1 for i in range(16)]).reshape(4, 4)
        if np.array_equal(m @ J @ m.T % 2, J):
            found.add(SymplecticMatrix.from_array(m).rows)
    assert len(found) == 720
    assert found == {m.rows for m in enumerate_sp4()}


def _span(vectors):
    out = {0}
    for v in vectors:
        out |= {x ^ v for x in out}
    return out


vec8 = st.lists(st.integers(0, 255), max_size=5)


@settings(max_examples=200, deadline=None)
@given(vec8, vec8)
def test_intersection_and_sum_match_brute_force(a, b):
    va, vb = GF2Subspace.span(4, a), GF2Subspace.span(4, b)
    assert set(intersection(va, vb).elements()) == _span(a) & _span(b)
    assert set(subspace_sum(va, vb).elements()) == _span(a + b)


@settings(max_examples=200, deadline=None)
@given(vec8)
def test_rank_and_reduction(vs):
    assert rank(vs) == len(reduce_basis(vs))
    assert 2 ** rank(vs) == len(_span(vs))
    eb = EchelonBasis(vs)
    assert all(v in eb for v in vs)


def test_projection_and_restriction():
    v = GF2Subspace.span(3, [0b010111])
    assert project_to_sites(v, [1]).basis == (0b000100,)
    assert restrict_subspace(v, [1, 2]).basis == (0b0101,)
    with pytest.raises(IndexError):
        project_to_sites(v, [3])


def test_closure_is_invariant(rng):
    mats = enumerate_sp4()
    for _ in range(30):
        m = mats[int(rng.integers(720))]
        v0 = GF2Subspace.span(2, [int(rng.integers(1, 16))])
        c = closure(m, v0)
        assert all(m.apply(b) in c for b in c.basis)
        assert v0 <= c


@pytest.mark.parametrize("m,order", [
    (SymplecticMatrix.identity(2), 1),
    (SymplecticMatrix.J(1), 2),
    (SymplecticMatrix.from_columns([4, 8, 1, 2]), 2),
])
def test_matrix_order(m, order):
    assert matrix_order(m) == order


def test_matrix_order_all_sp4():
    for m in enumerate_sp4():
        k = matrix_order(m)
        assert (m ** k).is_identity() and all(not (m ** j).is_identity() for j in range(1, k))


def test_embed_acts_locally():
    swap = SymplecticMatrix.from_columns([4, 8, 1, 2])
    big = embed(swap, [1, 2], 4)
    assert symplectic_check(big)
    assert big.apply(1 << 2) == 1 << 4
    assert big.apply(1) == 1
