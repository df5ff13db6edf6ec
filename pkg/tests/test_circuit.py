import numpy as np
import pytest

from fragmentia import clifford as cl
from fragmentia.circuit import (
    FloquetCircuit,
    ReducedCircuit,
    build_floquet,
    circuit_from_bond_gates,
    haar_quaternion,
    quaternion_to_su2,
    reduce_staircase,
    symplectic_image,
)
from fragmentia.gf2 import PauliString, symplectic_check
from fragmentia.walls import is_wall


@pytest.mark.parametrize("n", [2, 5, 8])
@pytest.mark.parametrize("p", [0.0, 0.4, 1.0])
def test_json_roundtrip(n, p):
    c = build_floquet(n, p, seed=3, realization=2)
    c2 = FloquetCircuit.from_json(c.to_json())
    assert c2 == c and c2.to_json() == c.to_json()


def test_build_is_deterministic_per_realization():
    assert build_floquet(7, 0.5, 1, 4).to_json() == build_floquet(7, 0.5, 1, 4).to_json()
    assert build_floquet(7, 0.5, 1, 4).to_json() != build_floquet(7, 0.5, 1, 5).to_json()


def test_mask_extremes():
    assert not any(build_floquet(9, 0.0, 1).perturbation_mask)
    assert all(build_floquet(9, 1.0, 1).perturbation_mask)


def test_every_bond_has_a_nonproduct_gate():
    c = build_floquet(10, 0.0, 2)
    assert all(c.bond_gate(i).class_tag != cl.IDENTITY for i in range(9))
    with pytest.raises(IndexError):
        c.bond_gate(9)


def test_symplectic_image_is_symplectic():
    for r in range(10):
        m, signs = symplectic_image(build_floquet(6, 0.0, 9, r))
        assert symplectic_check(m) and len(signs) == 12


def test_identity_dressed_circuit_is_identity():
    ident = cl.representative(cl.IDENTITY)
    c = circuit_from_bond_gates(5, [ident] * 4)
    assert symplectic_image(c)[0].is_identity()


def test_layer_order_matters_and_flag_respected():
    gates = [cl.representative(cl.SWAP), cl.representative(cl.CZ)]
    a = circuit_from_bond_gates(3, gates, even_first=True)
    b = circuit_from_bond_gates(3, gates, even_first=False)
    p = PauliString.from_label("+XII")
    # SWAP first moves X to site 1, CZ then attaches Z on site 2
    assert a.evolve_pauli(p).label() == "+IXZ"
    assert b.evolve_pauli(p).label() == "+IXI"


def test_haar_quaternion_is_su2(rng):
    for _ in range(20):
        u = quaternion_to_su2(haar_quaternion(rng))
        assert np.allclose(u @ u.conj().T, np.eye(2))
        assert np.isclose(np.linalg.det(u), 1)


def test_haar_trace_statistics(rng):
    # Haar SU(2): E|Tr U|^2 / 4 = 1/4
    vals = np.array([abs(np.trace(quaternion_to_su2(haar_quaternion(rng)))) ** 2 / 4 for _ in range(20000)])
    assert abs(vals.mean() - 0.25) < 4 * vals.std() / np.sqrt(len(vals))


def test_bad_mask_or_rotation_rejected():
    c = build_floquet(4, 0.0, 1)
    with pytest.raises(ValueError):
        c.with_mask([True, False, False, False], {})
    with pytest.raises(ValueError):
        build_floquet(4, 1.5, 1)


def test_reduce_staircase_bounds():
    c = build_floquet(6, 0.0, 1)
    assert reduce_staircase(c, 0, 4).nsites == 6
    with pytest.raises(IndexError):
        reduce_staircase(c, 1, 4)


def test_staircase_and_brickwork_agree():
    for r in range(300):
        c = build_floquet(8, 0.0, 77, r, even_first=bool(r % 2))
        for s in range(6):
            for k in range(1, 4):
                if s + k + 1 >= 8:
                    continue
                a = reduce_staircase(c, s, k, "staircase")
                b = reduce_staircase(c, s, k, "brickwork")
                assert is_wall(a) == is_wall(b)
                assert is_wall(a, "right") == is_wall(b, "right")


def test_mirror_maps_left_to_right(rng):
    for _ in range(200):
        rc = ReducedCircuit(2, tuple(cl.sample_nonproduct(rng) for _ in range(3)))
        assert is_wall(rc, "left") == is_wall(rc.mirrored(), "right")


def test_sub_window():
    rc = ReducedCircuit(3, tuple(cl.representative(t) for t in (cl.CZ, cl.SWAP, cl.SWAP, cl.CZ)))
    s = rc.sub(1, 2)
    assert s.k == 1 and s.gates == rc.gates[1:3] and s.start_site == 1
