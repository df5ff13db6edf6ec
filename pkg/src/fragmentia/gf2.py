"""Bit-packed GF(2) linear algebra for Pauli strings and symplectic matrices.

Vectors are Python ints.  Bit ``2*j`` is the X component of qubit ``j`` and bit
``2*j + 1`` its Z component, so a single site occupies a contiguous 2-bit mask.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


def _xmask(n: int) -> int:
    return int("01" * n, 2) if n else 0


def site_mask(sites: Iterable[int]) -> int:
    m = 0
    for s in sites:
        m |= 0b11 << (2 * s)
    return m


def parity(v: int) -> int:
    return v.bit_count() & 1


def symplectic_product(u: int, v: int) -> int:
    """<u, v> = sum_j x_u z_v + z_u x_v (mod 2)."""
    # The swap of each (x, z) pair turns the form into a plain dot product.
    return parity(u & _swap_pairs(v))


def _swap_pairs(v: int) -> int:
    n = (v.bit_length() + 1) // 2
    xm = _xmask(n)
    return ((v & xm) << 1) | ((v >> 1) & xm)


def support(v: int) -> list[int]:
    """Sites on which ``v`` acts non-trivially."""
    out = []
    j = 0
    while v:
        if v & 0b11:
            out.append(j)
        v >>= 2
        j += 1
    return out


def bits_to_list(v: int, width: int) -> list[int]:
    return [(v >> i) & 1 for i in range(width)]


def list_to_bits(bits: Sequence[int]) -> int:
    v = 0
    for i, b in enumerate(bits):
        if b & 1:
            v |= 1 << i
    return v


# ---------------------------------------------------------------------------
# Pauli strings

_SINGLE = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_FROM_CHAR = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_SIGN_STR = {0: "+", 1: "+i", 2: "-", 3: "-i"}


@dataclass(frozen=True)
class PauliString:
    """``i**phase_exp * prod_j X_j**x_j Z_j**z_j`` on ``n`` qubits."""

    n: int
    bits: int = 0
    phase_exp: int = 0

    def __post_init__(self):
        if self.bits < 0 or self.bits >> (2 * self.n):
            raise ValueError(f"bits do not fit in {2 * self.n} positions")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"+XIZ"``, ``"-iY"``, ``"ZZ"`` and the like (qubit 0 first)."""
        sign = 0
        body = label
        for prefix, s in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2), ("i", 1)):
            if label.startswith(prefix) and (len(label) > len(prefix)):
                rest = label[len(prefix):]
                if rest and all(c in _FROM_CHAR for c in rest):
                    sign, body = s, rest
                    break
        bits = 0
        ny = 0
        for j, c in enumerate(body):
            try:
                x, z = _FROM_CHAR[c]
            except KeyError:
                raise ValueError(f"bad Pauli label {label!r}") from None
            bits |= (x | (z << 1)) << (2 * j)
            ny += x & z
        return cls(len(body), bits, sign + ny)

    @classmethod
    def single(cls, n: int, site: int, char: str) -> "PauliString":
        x, z = _FROM_CHAR[char]
        return cls(n, (x | (z << 1)) << (2 * site), x & z)

    @property
    def num_y(self) -> int:
        return (self.bits & (self.bits >> 1) & _xmask(self.n)).bit_count()

    @property
    def hermitian_sign(self) -> int:
        """Exponent ``s`` such that the operator equals ``i**s`` times a product of I/X/Y/Z."""
        return (self.phase_exp - self.num_y) % 4

    def is_hermitian(self) -> bool:
        return self.hermitian_sign % 2 == 0

    def site(self, j: int) -> tuple[int, int]:
        w = (self.bits >> (2 * j)) & 0b11
        return w & 1, w >> 1

    def label(self) -> str:
        chars = "".join(_SINGLE[self.site(j)] for j in range(self.n))
        return _SIGN_STR[self.hermitian_sign] + chars

    __str__ = label

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        # Z^z1 X^x2 = (-1)^{z1 x2} X^x2 Z^z1 on each site
        swaps = ((self.bits >> 1) & other.bits & _xmask(self.n)).bit_count()
        return PauliString(self.n, self.bits ^ other.bits,
                           self.phase_exp + other.phase_exp + 2 * swaps)

    def commutes(self, other: "PauliString") -> bool:
        return symplectic_product(self.bits, other.bits) == 0

    def weight(self) -> int:
        return len(support(self.bits))

    def negate(self) -> "PauliString":
        return PauliString(self.n, self.bits, self.phase_exp + 2)

    def restrict(self, sites: Sequence[int]) -> "PauliString":
        """Tensor factor on ``sites`` (in the given order); the phase stays with it."""
        bits = 0
        ny = 0
        for k, s in enumerate(sites):
            w = (self.bits >> (2 * s)) & 0b11
            bits |= w << (2 * k)
            ny += w == 0b11
        return PauliString(len(sites), bits, self.hermitian_sign + ny)

    def to_matrix(self):
        import numpy as np

        mats = {
            (0, 0): np.eye(2, dtype=complex),
            (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
            (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.array([[1.0 + 0j]])
        for j in range(self.n):
            x, z = self.site(j)
            m = mats[(x, 0)] @ mats[(0, z)]
            out = np.kron(out, m)
        return (1j ** self.phase_exp) * out


# ---------------------------------------------------------------------------
# Row reduction and subspaces


def reduce_basis(vectors: Iterable[int]) -> tuple[int, ...]:
    """Reduced row-echelon basis, sorted by descending pivot (highest set bit)."""
    piv: dict[int, int] = {}
    for v in vectors:
        for p in sorted(piv, reverse=True):
            if (v >> p) & 1:
                v ^= piv[p]
        if v:
            p = v.bit_length() - 1
            for q, w in piv.items():
                if (w >> p) & 1:
                    piv[q] = w ^ v
            piv[p] = v
    return tuple(piv[p] for p in sorted(piv, reverse=True))


def rank(vectors: Iterable[int]) -> int:
    return len(reduce_basis(vectors))


class EchelonBasis:
    """Incremental GF(2) basis keyed by pivot bit; ``add`` returns whether it grew."""

    __slots__ = ("piv",)

    def __init__(self, vectors: Iterable[int] = ()):
        self.piv: dict[int, int] = {}
        for v in vectors:
            self.add(v)

    def residue(self, v: int) -> int:
        piv = self.piv
        while v:
            w = piv.get(v.bit_length() - 1)
            if w is None:
                return v
            v ^= w
        return 0

    def add(self, v: int) -> bool:
        v = self.residue(v)
        if not v:
            return False
        self.piv[v.bit_length() - 1] = v
        return True

    def __contains__(self, v: int) -> bool:
        return self.residue(v) == 0

    def __len__(self) -> int:
        return len(self.piv)

    def vectors(self) -> list[int]:
        return list(self.piv.values())


@dataclass(frozen=True)
class GF2Subspace:
    """Subspace of GF(2)^{2n}, stored in canonical reduced row-echelon form."""

    n: int
    basis: tuple[int, ...] = ()

    def __post_init__(self):
        canon = reduce_basis(self.basis)
        if any(v >> (2 * self.n) for v in canon):
            raise ValueError("basis vector exceeds ambient dimension")
        object.__setattr__(self, "basis", canon)

    @classmethod
    def span(cls, n: int, vectors: Iterable[int]) -> "GF2Subspace":
        return cls(n, tuple(vectors))

    @classmethod
    def zero(cls, n: int) -> "GF2Subspace":
        return cls(n, ())

    @classmethod
    def sites(cls, n: int, sites: Iterable[int]) -> "GF2Subspace":
        """Full local Pauli space on ``sites``."""
        vecs = []
        for s in sites:
            _check_site(n, s)
            vecs += [1 << (2 * s), 1 << (2 * s + 1)]
        return cls(n, tuple(vecs))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __contains__(self, v: int) -> bool:
        return EchelonBasis(self.basis).residue(v) == 0

    def __add__(self, other: "GF2Subspace") -> "GF2Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "GF2Subspace") -> "GF2Subspace":
        return intersection(self, other)

    def __le__(self, other: "GF2Subspace") -> bool:
        eb = EchelonBasis(other.basis)
        return all(eb.residue(v) == 0 for v in self.basis)

    def support(self) -> list[int]:
        acc = 0
        for v in self.basis:
            acc |= v
        return support(acc)

    def elements(self):
        """All 2**dim vectors (only sensible for small subspaces)."""
        out = [0]
        for b in self.basis:
            out += [v ^ b for v in out]
        return out


def _check_site(n: int, s: int) -> None:
    if not 0 <= s < n:
        raise IndexError(f"site {s} out of range for n={n}")


def subspace_sum(a: GF2Subspace, b: GF2Subspace) -> GF2Subspace:
    if a.n != b.n:
        raise ValueError("ambient dimension mismatch")
    return GF2Subspace(a.n, a.basis + b.basis)


def intersection(a: GF2Subspace, b: GF2Subspace) -> GF2Subspace:
    """Zassenhaus: row-reduce [a | a] over [b | 0] and read off the zero-left rows."""
    if a.n != b.n:
        raise ValueError("ambient dimension mismatch")
    w = 2 * a.n
    rows = [(v << w) | v for v in a.basis] + [v << w for v in b.basis]
    out = []
    for r in reduce_basis(rows):
        if r >> w == 0:
            out.append(r)
    return GF2Subspace(a.n, tuple(out))


def project_to_sites(v: GF2Subspace, sites: Iterable[int]) -> GF2Subspace:
    sites = list(sites)
    for s in sites:
        _check_site(v.n, s)
    m = site_mask(sites)
    return GF2Subspace(v.n, tuple(b & m for b in v.basis))


def compress_sites(vec: int, sites: Sequence[int]) -> int:
    """Re-index the bits of ``sites`` to consecutive positions 0..len(sites)-1."""
    out = 0
    for k, s in enumerate(sites):
        out |= ((vec >> (2 * s)) & 0b11) << (2 * k)
    return out


def restrict_subspace(v: GF2Subspace, sites: Sequence[int]) -> GF2Subspace:
    """Project onto ``sites`` and express in a ``len(sites)``-qubit ambient space."""
    return GF2Subspace(len(sites), tuple(compress_sites(b, sites) for b in v.basis))


# ---------------------------------------------------------------------------
# Symplectic matrices


def _mat_from_columns(cols: Sequence[int], width: int) -> tuple[int, ...]:
    rows = [0] * width
    for j, c in enumerate(cols):
        for i in range(width):
            if (c >> i) & 1:
                rows[i] |= 1 << j
    return tuple(rows)


@dataclass(frozen=True)
class SymplecticMatrix:
    """2n x 2n matrix over GF(2); ``rows[i]`` bit ``j`` is entry (i, j)."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != 2 * self.n:
            raise ValueError(f"expected {2 * self.n} rows, got {len(self.rows)}")
        if any(r < 0 or r >> (2 * self.n) for r in self.rows):
            raise ValueError("row exceeds matrix width")

    @classmethod
    def identity(cls, n: int) -> "SymplecticMatrix":
        return cls(n, tuple(1 << i for i in range(2 * n)))

    @classmethod
    def J(cls, n: int) -> "SymplecticMatrix":
        return cls(n, tuple(1 << (i ^ 1) for i in range(2 * n)))

    @classmethod
    def from_columns(cls, cols: Sequence[int]) -> "SymplecticMatrix":
        """Build from the images of the generators x_1, z_1, x_2, ..."""
        if len(cols) % 2:
            raise ValueError("odd dimension")
        return cls(len(cols) // 2, _mat_from_columns(cols, len(cols)))

    @classmethod
    def from_array(cls, a) -> "SymplecticMatrix":
        import numpy as np

        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        if a.shape[0] % 2:
            raise ValueError("odd dimension")
        return cls(a.shape[0] // 2, tuple(list_to_bits(r) for r in a.tolist()))

    def to_array(self):
        import numpy as np

        w = 2 * self.n
        return np.array([bits_to_list(r, w) for r in self.rows], dtype=np.uint8)

    @property
    def columns(self) -> tuple[int, ...]:
        return _mat_from_columns(self.rows, 2 * self.n)  # transpose

    def transpose(self) -> "SymplecticMatrix":
        return SymplecticMatrix(self.n, self.columns)

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        orows = other.rows
        out = []
        for r in self.rows:
            acc = 0
            j = 0
            while r:
                if r & 1:
                    acc ^= orows[j]
                r >>= 1
                j += 1
            out.append(acc)
        return SymplecticMatrix(self.n, tuple(out))

    def apply(self, v: int) -> int:
        return apply(self, v)

    def __pow__(self, k: int) -> "SymplecticMatrix":
        result = SymplecticMatrix.identity(self.n)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def is_identity(self) -> bool:
        return all(r == 1 << i for i, r in enumerate(self.rows))


def symplectic_check(m) -> bool:
    """True iff ``m J m^T = J`` over GF(2).  Accepts a SymplecticMatrix or a square array."""
    if not isinstance(m, SymplecticMatrix):
        import numpy as np

        a = np.asarray(m)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        if a.shape[0] % 2:
            raise ValueError("symplectic matrices have even dimension")
        m = SymplecticMatrix.from_array(a % 2)
    lhs = m @ SymplecticMatrix.J(m.n) @ m.transpose()
    return lhs.rows == SymplecticMatrix.J(m.n).rows


def apply(m: SymplecticMatrix, v: int) -> int:
    if v >> (2 * m.n):
        raise ValueError("vector exceeds matrix dimension")
    out = 0
    for i, r in enumerate(m.rows):
        if (r & v).bit_count() & 1:
            out |= 1 << i
    return out


def closure(m: SymplecticMatrix, v0: GF2Subspace) -> GF2Subspace:
    """Smallest m-invariant subspace containing ``v0``."""
    if m.n != v0.n:
        raise ValueError("dimension mismatch")
    return GF2Subspace(m.n, tuple(krylov(m.apply, v0.basis)))


def krylov(step, seeds: Iterable[int]) -> list[int]:
    """Basis of span{step^t(s)} for a linear map ``step`` on bit vectors."""
    eb = EchelonBasis()
    frontier = [s for s in seeds if eb.add(s)]
    out = list(frontier)
    while frontier:
        nxt = []
        for v in frontier:
            w = step(v)
            if eb.add(w):
                nxt.append(w)
                out.append(w)
        frontier = nxt
    return out


DEFAULT_ORDER_CAP = 1 << 16


def matrix_order(m: SymplecticMatrix, cap: int = DEFAULT_ORDER_CAP) -> int | None:
    """Smallest ``t >= 1`` with ``m**t = 1``, or ``None`` if it exceeds ``cap``."""
    power = m
    for t in range(1, cap + 1):
        if power.is_identity():
            return t
        power = power @ m
    return None


def embed(local: SymplecticMatrix, sites: Sequence[int], n: int) -> SymplecticMatrix:
    """Lift a matrix acting on ``len(sites)`` qubits to act on ``sites`` of an ``n``-qubit register."""
    if local.n != len(sites):
        raise ValueError("site count mismatch")
    for s in sites:
        _check_site(n, s)
    pos = []
    for s in sites:
        pos += [2 * s, 2 * s + 1]
    cols = [1 << i for i in range(2 * n)]
    lcols = local.columns
    for j, pj in enumerate(pos):
        c = lcols[j]
        out = 0
        for i, pi in enumerate(pos):
            if (c >> i) & 1:
                out |= 1 << pi
        cols[pj] = out
    return SymplecticMatrix.from_columns(cols)
