"""One- and two-qubit Clifford gates: tableaux, equivalence classes and sampling.

A gate is stored as the images of the generators X_1, Z_1, X_2, Z_2 (Hermitian
Pauli strings with a +-1 sign).  Conjugation of an arbitrary Pauli goes through a
precomputed lookup table, so applying a gate costs O(1) regardless of how large
the surrounding register is.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gf2 import PauliString, SymplecticMatrix, symplectic_check, symplectic_product

IDENTITY, CZ, SWAP, FSWAP = "Identity", "CZ", "SWAP", "FSWAP"
CLASSES = (IDENTITY, CZ, SWAP, FSWAP)
NONPRODUCT_CLASSES = (CZ, SWAP, FSWAP)


def _hermitian_image(nq: int, bits: int, sign: int) -> PauliString:
    ny = (bits & (bits >> 1) & int("01" * nq, 2)).bit_count()
    return PauliString(nq, bits, 2 * sign + ny)


@dataclass(frozen=True, eq=False)
class Clifford:
    """Clifford on ``n`` qubits, given by the images of X_1, Z_1, ..., X_n, Z_n."""

    images: tuple[PauliString, ...]
    _table: tuple = field(init=False, repr=False)

    def __post_init__(self):
        nq = len(self.images) // 2
        if len(self.images) != 2 * nq or any(p.n != nq for p in self.images):
            raise ValueError("need 2n images on n qubits")
        if any(not p.is_hermitian() for p in self.images):
            raise ValueError("generator images must be Hermitian")
        if not symplectic_check(SymplecticMatrix.from_columns([p.bits for p in self.images])):
            raise ValueError("generator images do not preserve commutation relations")
        object.__setattr__(self, "_table", _conjugation_table(self.images))

    @classmethod
    def from_symplectic(cls, symp: SymplecticMatrix, signs: Sequence[int] | int = 0):
        nq = symp.n
        if isinstance(signs, int):
            signs = [(signs >> j) & 1 for j in range(2 * nq)]
        imgs = tuple(_hermitian_image(nq, c, s) for c, s in zip(symp.columns, signs))
        return cls(imgs)

    @property
    def n(self) -> int:
        return len(self.images) // 2

    @functools.cached_property
    def symp(self) -> SymplecticMatrix:
        return SymplecticMatrix.from_columns([p.bits for p in self.images])

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(p.hermitian_sign // 2 for p in self.images)

    @property
    def sign_bits(self) -> int:
        return sum(s << j for j, s in enumerate(self.signs))

    def key(self) -> tuple:
        return (self.symp.rows, self.signs)

    def __eq__(self, other):
        return isinstance(other, Clifford) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def conjugate_local(self, bits: int) -> tuple[int, int]:
        """Image of the canonical operator with ``bits``: ``(new_bits, phase increment)``."""
        return self._table[bits]

    def compose(self, first: "Clifford") -> "Clifford":
        """The gate ``self . first`` (apply ``first``, then ``self``)."""
        imgs = tuple(conjugate(self, p) for p in first.images)
        return type(self)(imgs) if type(self) is type(first) else Clifford(imgs)

    def __matmul__(self, other: "Clifford") -> "Clifford":
        return self.compose(other)

    def unitary(self) -> np.ndarray:
        return clifford_unitary(self)


def _conjugation_table(images: Sequence[PauliString]) -> tuple:
    nq = len(images) // 2
    table = []
    for b in range(1 << (2 * nq)):
        acc = PauliString.identity(nq)
        for j in range(2 * nq):
            if (b >> j) & 1:
                acc = acc * images[j]
        table.append((acc.bits, acc.phase_exp))
    return tuple(table)


class SingleQubitClifford(Clifford):
    pass


class TwoQubitClifford(Clifford):
    @functools.cached_property
    def class_tag(self) -> str:
        return classify(self.symp)


def conjugate(g: Clifford, p: PauliString, sites: Sequence[int] | None = None) -> PauliString:
    """``g p g^dagger``; with ``sites`` the gate acts on those qubits of a larger register."""
    if sites is None:
        if p.n != g.n:
            raise ValueError(f"gate acts on {g.n} qubits, Pauli has {p.n}")
        nb, inc = g._table[p.bits]
        return PauliString(p.n, nb, p.phase_exp + inc)
    if len(sites) != g.n:
        raise ValueError("site count mismatch")
    bits, phase = conjugate_bits(g, p.bits, p.phase_exp, sites)
    return PauliString(p.n, bits, phase)


def conjugate_bits(g: Clifford, bits: int, phase: int, sites: Sequence[int]) -> tuple[int, int]:
    """Conjugate the register operator ``(bits, phase)`` by ``g`` placed on ``sites``."""
    if g.n == 2 and sites[1] == sites[0] + 1:
        sh = 2 * sites[0]
        local = (bits >> sh) & 0xF
        nb, inc = g._table[local]
        return bits ^ ((local ^ nb) << sh), phase + inc
    if g.n == 1:
        sh = 2 * sites[0]
        local = (bits >> sh) & 0b11
        nb, inc = g._table[local]
        return bits ^ ((local ^ nb) << sh), phase + inc
    local = 0
    for k, s in enumerate(sites):
        local |= ((bits >> (2 * s)) & 0b11) << (2 * k)
    nb, inc = g._table[local]
    for k, s in enumerate(sites):
        bits &= ~(0b11 << (2 * s))
        bits |= ((nb >> (2 * k)) & 0b11) << (2 * s)
    return bits, phase + inc


# ---------------------------------------------------------------------------
# Symplectic groups and classification


def _rank2(u: int, w: int) -> int:
    if u == 0 and w == 0:
        return 0
    if u == 0 or w == 0 or u == w:
        return 1
    return 2


def classify(symp: SymplecticMatrix) -> str:
    """Equivalence class of a 4x4 symplectic matrix under single-qubit dressing.

    Uses the site-2 part of the images of the site-1 generators (its rank is a
    dressing invariant) and whether the site-1 part vanishes.
    """
    if symp.n != 2:
        raise ValueError("classify expects a two-qubit symplectic matrix")
    if not symplectic_check(symp):
        raise ValueError("matrix is not symplectic")
    c0, c1 = symp.columns[0], symp.columns[1]
    spread = _rank2(c0 >> 2, c1 >> 2)
    stay = _rank2(c0 & 3, c1 & 3)
    if spread == 0:
        return IDENTITY
    if spread == 1:
        return CZ
    return SWAP if stay == 0 else FSWAP


@functools.lru_cache(maxsize=None)
def enumerate_sp2() -> tuple[SymplecticMatrix, ...]:
    out = []
    for c0 in (1, 2, 3):
        for c1 in (1, 2, 3):
            if symplectic_product(c0, c1):
                out.append(SymplecticMatrix.from_columns([c0, c1]))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def enumerate_sp4() -> tuple[SymplecticMatrix, ...]:
    """All 720 elements of Sp(4, GF(2)), built column pair by column pair."""
    out = []
    vecs = range(1, 16)
    for c0 in vecs:
        for c1 in vecs:
            if not symplectic_product(c0, c1):
                continue
            rest = [v for v in vecs if not symplectic_product(v, c0) and not symplectic_product(v, c1)]
            for c2 in rest:
                for c3 in rest:
                    if symplectic_product(c2, c3):
                        out.append(SymplecticMatrix.from_columns([c0, c1, c2, c3]))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def class_census() -> dict[str, int]:
    counts = dict.fromkeys(CLASSES, 0)
    for m in enumerate_sp4():
        counts[classify(m)] += 1
    return counts


@functools.lru_cache(maxsize=None)
def nonproduct_sp4() -> tuple[SymplecticMatrix, ...]:
    return tuple(m for m in enumerate_sp4() if classify(m) != IDENTITY)


def _rep_columns():
    # generator images x1, z1, x2, z2 as bits (x1=1, z1=2, x2=4, z2=8)
    return {
        IDENTITY: [1, 2, 4, 8],
        CZ: [1 | 8, 2, 2 | 4, 8],
        SWAP: [4, 8, 1, 2],
        FSWAP: [2 | 4, 8, 1 | 8, 2],
    }


def representative(tag: str) -> TwoQubitClifford:
    return TwoQubitClifford.from_symplectic(SymplecticMatrix.from_columns(_rep_columns()[tag]))


def product_symplectic(a: SymplecticMatrix, b: SymplecticMatrix) -> SymplecticMatrix:
    """``a (x) b`` on two qubits."""
    ca, cb = a.columns, b.columns
    return SymplecticMatrix.from_columns([ca[0], ca[1], cb[0] << 2, cb[1] << 2])


def dress(rep: SymplecticMatrix, a1: int, a2: int, a3: int, a4: int) -> SymplecticMatrix:
    """``(a1 (x) a2) rep (a3 (x) a4)`` with ``a_i`` indexing :func:`enumerate_sp2`."""
    sp2 = enumerate_sp2()
    return product_symplectic(sp2[a1], sp2[a2]) @ rep @ product_symplectic(sp2[a3], sp2[a4])


@functools.lru_cache(maxsize=None)
def canonical_dressings() -> dict[tuple[int, ...], tuple[str, int, int, int, int]]:
    """First (in lexicographic order) dressing of a class representative giving each Sp(4) element."""
    out: dict[tuple[int, ...], tuple] = {}
    for tag in CLASSES:
        rep = representative(tag).symp
        for idx in itertools.product(range(6), repeat=4):
            m = dress(rep, *idx)
            out.setdefault(m.rows, (tag, *idx))
    return out


# ---------------------------------------------------------------------------
# Single-qubit group


@functools.lru_cache(maxsize=None)
def enumerate_c1() -> tuple[SingleQubitClifford, ...]:
    """The 24 single-qubit Cliffords (6 symplectic parts x 4 sign choices)."""
    return tuple(SingleQubitClifford.from_symplectic(m, s)
                 for m in enumerate_sp2() for s in range(4))


def sample_c1(rng: np.random.Generator) -> SingleQubitClifford:
    return enumerate_c1()[int(rng.integers(24))]


def c1_preserves(g: SingleQubitClifford, p: PauliString | str) -> bool:
    """True iff conjugation by ``g`` maps the single-site Pauli ``p`` to +-p."""
    if isinstance(p, str):
        p = PauliString.from_label(p)
    if p.n != 1:
        raise ValueError("expected a single-qubit Pauli")
    return conjugate(g, p).bits == p.bits


# ---------------------------------------------------------------------------
# Sampling


def sample_nonproduct(rng: np.random.Generator) -> TwoQubitClifford:
    """Uniform over non-product two-qubit Cliffords (symplectic part and signs)."""
    pool = nonproduct_sp4()
    m = pool[int(rng.integers(len(pool)))]
    return _gate(m.rows, int(rng.integers(16)))


def sample_nonproduct_dressed(rng: np.random.Generator) -> TwoQubitClifford:
    """Same measure, built by picking a class with weight 9:1:9 and dressing
    the representative with four uniform single-qubit Cliffords."""
    u = rng.integers(19)
    tag = CZ if u < 9 else (SWAP if u < 10 else FSWAP)
    c1 = enumerate_c1()
    a = [c1[int(i)] for i in rng.integers(24, size=4)]
    rep = representative(tag)
    outer = tensor(a[0], a[1])
    inner = tensor(a[2], a[3])
    g = outer.compose(rep.compose(inner))
    return _gate(g.symp.rows, g.sign_bits)


@functools.lru_cache(maxsize=20000)
def _gate(rows: tuple[int, ...], signs: int) -> TwoQubitClifford:
    return TwoQubitClifford.from_symplectic(SymplecticMatrix(2, rows), signs)


def gate_from_symplectic(symp: SymplecticMatrix, signs: int = 0) -> TwoQubitClifford:
    return _gate(symp.rows, signs)


def tensor(a: SingleQubitClifford, b: SingleQubitClifford) -> TwoQubitClifford:
    imgs = []
    for p in a.images:
        imgs.append(PauliString(2, p.bits, p.phase_exp))
    for p in b.images:
        imgs.append(PauliString(2, p.bits << 2, p.phase_exp))
    return TwoQubitClifford(tuple(imgs))


# ---------------------------------------------------------------------------
# Text form


def gate_to_text(g: TwoQubitClifford) -> str:
    """``"CZ:1.0.4.2:0110"``: class tag, dressing indices (a1.a2.a3.a4), sign bits."""
    tag, *idx = canonical_dressings()[g.symp.rows]
    signs = "".join(str(s) for s in g.signs)
    return f"{tag}:{'.'.join(map(str, idx))}:{signs}"


def gate_from_text(text: str) -> TwoQubitClifford:
    try:
        tag, idx, signs = text.split(":")
        a = [int(i) for i in idx.split(".")]
        s = [int(c) for c in signs]
        if tag not in CLASSES or len(a) != 4 or len(s) != 4 or not all(0 <= i < 6 for i in a):
            raise ValueError
    except ValueError:
        raise ValueError(f"malformed gate text {text!r}") from None
    m = dress(representative(tag).symp, *a)
    return _gate(m.rows, sum(b << j for j, b in enumerate(s)))


# ---------------------------------------------------------------------------
# Dense matrices


def clifford_unitary(g: Clifford) -> np.ndarray:
    """A unitary (up to global phase) implementing ``g``.

    For any unitary U and Pauli Q, sum_P (U P U^dag) Q P^dag = 2^n Tr(U^dag Q) U,
    so it suffices to find a Q with non-vanishing overlap.
    """
    nq = g.n
    d = 1 << nq
    paulis = [PauliString(nq, b, 0) for b in range(d * d)]
    mats = [p.to_matrix() for p in paulis]
    images = [conjugate(g, p).to_matrix() for p in paulis]
    for q in mats:
        acc = sum(img @ q @ m.conj().T for img, m in zip(images, mats))
        norm = np.linalg.norm(acc)
        if norm > 1e-9:
            u = acc / norm * np.sqrt(d)
            return u
    raise AssertionError("no Pauli with non-zero overlap")
