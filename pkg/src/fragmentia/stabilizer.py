"""Stabilizer-state simulation of the Clifford (p=0) circuit and GF(2)-rank entropies."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import FloquetCircuit, symplectic_image
from .gf2 import PauliString, rank, site_mask, symplectic_product


class UnsupportedCircuit(ValueError):
    """The circuit contains non-Clifford rotations."""


@dataclass
class StabilizerTableau:
    n: int
    generators: list[PauliString]

    def __post_init__(self):
        if len(self.generators) != self.n:
            raise ValueError("need exactly n generators")
        if any(g.n != self.n or not g.is_hermitian for g in self.generators):
            raise ValueError("generators must be Hermitian n-qubit Paulis")

    def validate(self) -> None:
        bits = [g.bits for g in self.generators]
        if rank(bits) != self.n:
            raise ValueError("generators are not independent")
        for i, u in enumerate(bits):
            for v in bits[i + 1:]:
                if symplectic_product(u, v):
                    raise ValueError("generators do not commute")

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, list(self.generators))

    def to_statevector(self) -> np.ndarray:
        """Dense state as the normalised image of the stabilizer projector (small n only)."""
        dim = 1 << self.n
        proj = np.eye(dim, dtype=complex)
        for g in self.generators:
            proj = proj @ (np.eye(dim) + g.to_matrix()) / 2
        col = int(np.argmax(np.linalg.norm(proj, axis=0)))
        psi = proj[:, col]
        return psi / np.linalg.norm(psi)


def init_zero(n: int) -> StabilizerTableau:
    if n < 1:
        raise ValueError("n must be at least 1")
    return StabilizerTableau(n, [PauliString.single(n, i, "Z") for i in range(n)])


def evolve(t: StabilizerTableau, c: FloquetCircuit, periods: int = 1) -> StabilizerTableau:
    """Stabilizers of U^periods |psi> with U the circuit's Clifford period; in place."""
    if any(c.perturbation_mask):
        raise UnsupportedCircuit("circuit has single-qubit rotations; use the dense simulator")
    if c.n != t.n:
        raise ValueError("qubit count mismatch")
    t.generators = [c.evolve_pauli(g, periods) for g in t.generators]
    return t


def _check_cut(n: int, cut: int) -> None:
    if not 1 <= cut <= n - 1:
        raise ValueError("both sides of the cut must be non-empty")


def entropy_bits(gen_bits: Sequence[int], n: int, cut: int) -> int:
    """|L| - N_L for L = sites [0, cut), from the generators' bit vectors alone."""
    _check_cut(n, cut)
    right = site_mask(range(cut, n))
    # N_L = n - rank of the right-restricted generators
    return cut - (n - rank(g & right for g in gen_bits))


def entropy(t: StabilizerTableau, cut: int) -> int:
    """Entanglement entropy (bits) between sites [0, cut) and [cut, n)."""
    return entropy_bits([g.bits for g in t.generators], t.n, cut)


# ---------------------------------------------------------------------------
# Batched fast path: many circuits, sign-free generator bits


def _chunk_tables(cols: Sequence[int], nbits: int) -> np.ndarray:
    """tables[c, b] = image of the byte ``b`` placed at chunk ``c``."""
    nchunks = (nbits + 7) // 8
    tab = np.zeros((nchunks, 256), dtype=np.uint64)
    for c in range(nchunks):
        for j in range(8):
            if 8 * c + j >= nbits:
                break
            bit = np.uint64(cols[8 * c + j])
            mask = (np.arange(256) >> j) & 1 == 1
            tab[c, mask] ^= bit
    return tab


def _batch_rank(m: np.ndarray, nbits: int) -> np.ndarray:
    """GF(2) rank of each row-set in ``m`` (shape R x rows, uint64 bit rows)."""
    m = m.copy()
    r, rows = m.shape
    rk = np.zeros(r, dtype=np.int64)
    used = np.zeros((r, rows), dtype=bool)
    ar = np.arange(r)
    for b in range(nbits):
        bit = np.uint64(1 << b)
        has = ((m & bit) != 0) & ~used
        any_ = has.any(axis=1)
        piv = np.argmax(has, axis=1)
        prow = m[ar, piv]
        clear = ((m & bit) != 0) & any_[:, None]
        clear[ar, piv] = False
        m ^= np.where(clear, prow[:, None], np.uint64(0))
        used[ar[any_], piv[any_]] = True
        rk += any_
    return rk


def batch_entropy_traces(circuits: Sequence[FloquetCircuit], cut: int, tmax: int) -> np.ndarray:
    """S(t) for t = 0..tmax starting from |0...0>, one row per circuit (integers)."""
    n = circuits[0].n
    if n > 32:
        raise ValueError("batched path packs 2n bits into 64-bit words; n <= 32")
    _check_cut(n, cut)
    if any(any(c.perturbation_mask) for c in circuits):
        raise UnsupportedCircuit("circuit has single-qubit rotations; use the dense simulator")
    nbits = 2 * n
    tables = np.stack([_chunk_tables(symplectic_image(c)[0].columns, nbits) for c in circuits])
    nchunks = tables.shape[1]
    gens = np.tile(np.array([1 << (2 * i + 1) for i in range(n)], dtype=np.uint64), (len(circuits), 1))
    right = np.uint64(site_mask(range(cut, n)) >> (2 * cut))
    out = np.empty((len(circuits), tmax + 1), dtype=np.int64)
    ridx = np.arange(len(circuits))[:, None]
    for t in range(tmax + 1):
        restricted = (gens >> np.uint64(2 * cut)) & right
        out[:, t] = cut - (n - _batch_rank(restricted, 2 * (n - cut)))
        new = np.zeros_like(gens)
        for c in range(nchunks):
            byte = ((gens >> np.uint64(8 * c)) & np.uint64(255)).astype(np.intp)
            new ^= tables[ridx, c, byte]
        gens = new
    return out
