"""Walls, their internal subspaces and conserved charges, and circuit fragmentation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import clifford as cl
from .circuit import FloquetCircuit, ReducedCircuit, reduce_staircase
from .gf2 import (
    EchelonBasis,
    GF2Subspace,
    PauliString,
    compress_sites,
    intersection,
    krylov,
    matrix_order,
    site_mask,
    support,
    symplectic_product,
)


class LemmaViolation(AssertionError):
    """An internal consistency check that the theory guarantees has failed."""


@dataclass(frozen=True)
class ConservedCharge:
    tau: int
    theta: float
    orbit: tuple[PauliString, ...]

    def to_dict(self) -> dict:
        return {"tau": self.tau, "theta": self.theta, "orbit": [p.label() for p in self.orbit]}

    def operator(self):
        """Dense Q_M = sum_t exp(-i theta t / tau) M(t)."""
        import numpy as np

        return sum(np.exp(-1j * self.theta * t / self.tau) * m.to_matrix() for t, m in enumerate(self.orbit))


@dataclass(frozen=True)
class WallReport:
    position: int
    k: int
    is_left_wall: bool
    is_right_wall: bool
    irreducible: bool
    G_left: GF2Subspace
    G_right: GF2Subspace
    charges: tuple[ConservedCharge, ...] = ()
    interfering: bool = False
    unperturbed: bool = True
    classes: tuple[str, ...] = field(default=())

    def to_json(self) -> str:
        return json.dumps({
            "pos": self.position,
            "k": self.k,
            "irreducible": self.irreducible,
            "interfering": self.interfering,
            "unperturbed": self.unperturbed,
            "charges": [c.to_dict() for c in self.charges],
        })


def _boundary_seeds(rc: ReducedCircuit, side: str) -> list[int]:
    if side == "left":
        s = 0
    elif side == "right":
        s = rc.nsites - 1
    else:
        raise ValueError("side must be 'left' or 'right'")
    return [1 << (2 * s), 1 << (2 * s + 1)]


def reachable(rc: ReducedCircuit, side: str = "left") -> GF2Subspace:
    """Everything a signal injected on one boundary site can ever produce."""
    return GF2Subspace(rc.nsites, tuple(krylov(rc.step, _boundary_seeds(rc, side))))


def is_wall(rc: ReducedCircuit, side: str = "left") -> bool:
    far = rc.nsites - 1 if side == "left" else 0
    mask = site_mask([far])
    return all(v & mask == 0 for v in reachable(rc, side).basis)


def two_sided_check(rc: ReducedCircuit) -> bool:
    return is_wall(rc, "left") and is_wall(rc, "right")


def _central(rc: ReducedCircuit, v: GF2Subspace) -> GF2Subspace:
    sites = rc.central
    return GF2Subspace(rc.k, tuple(compress_sites(b, sites) for b in v.basis))


def internal_subspaces(rc: ReducedCircuit, check: bool = True) -> tuple[GF2Subspace, GF2Subspace]:
    """(G_left, G_right) on the k central qubits, re-indexed to 0..k-1."""
    gl = _central(rc, reachable(rc, "left"))
    gr = _central(rc, reachable(rc, "right"))
    if check and is_wall(rc, "left"):
        for u in gl.basis:
            for v in gr.basis:
                if symplectic_product(u, v):
                    raise LemmaViolation("internal subspaces are not J-orthogonal")
    return gl, gr


def splits_per_site(g: GF2Subspace) -> bool:
    """True iff ``g`` is the direct sum of its single-site projections."""
    return g.dim == sum(
        GF2Subspace(g.n, tuple(b & site_mask([j]) for b in g.basis)).dim for j in range(g.n)
    )


def conserved_charges(rc: ReducedCircuit, max_period: int = 1 << 16) -> tuple[ConservedCharge, ...]:
    """One charge per distinct Pauli orbit through a basis of G_left & G_right."""
    gl, gr = internal_subspaces(rc)
    common = intersection(gl, gr)
    cmask = site_mask(rc.central)
    seen: set[int] = set()
    out = []
    for g in common.basis:
        bits = 0
        for j, s in enumerate(rc.central):
            bits |= ((g >> (2 * j)) & 0b11) << (2 * s)
        if bits in seen:
            continue
        start = PauliString(rc.nsites, bits, PauliString(rc.nsites, bits).num_y)  # Hermitian, + sign
        orbit = [start]
        b, ph = rc.evolve_bits(start.bits, start.phase_exp)
        while b != start.bits:
            if b & ~cmask:
                raise LemmaViolation("conserved orbit left the wall's central sites")
            orbit.append(PauliString(rc.nsites, b, ph))
            if len(orbit) > max_period:
                raise LemmaViolation("orbit period exceeds cap")
            b, ph = rc.evolve_bits(b, ph)
        dphase = (ph - start.phase_exp) % 4
        if dphase % 2:
            raise LemmaViolation("Clifford orbit returned with a non-real phase")
        seen.update(p.bits for p in orbit)
        central_orbit = tuple(p.restrict(rc.central) for p in orbit)
        out.append(ConservedCharge(len(orbit), math.pi if dphase == 2 else 0.0, central_orbit))
    return tuple(out)


def is_irreducible(rc: ReducedCircuit) -> bool:
    """No proper contiguous sub-window (down to single gates) is itself a wall."""
    for width in range(rc.k):
        for a in range(rc.k + 1 - width):
            if is_wall(rc.sub(a, a + width)):
                return False
    return True


def time_iteration_is_wall(rc: ReducedCircuit, order_cap: int = 1 << 12) -> bool:
    """Oracle: evolve each left Pauli step by step and watch the right site.

    Runs for 4x the period of the reduced circuit (capped), independent of any
    subspace machinery.
    """
    order = matrix_order(rc.symp, order_cap) or order_cap
    steps = 4 * order
    rmask = site_mask([rc.nsites - 1])
    for bits in (0b01, 0b10, 0b11):
        v = bits
        for _ in range(steps):
            v = rc.step(v)
            if v & rmask:
                return False
    return True


def wall_report(rc: ReducedCircuit, mask: Sequence[bool] | None = None, with_charges: bool = True) -> WallReport:
    left = is_wall(rc, "left")
    right = is_wall(rc, "right")
    gl, gr = internal_subspaces(rc, check=left)
    charges = conserved_charges(rc) if (left and with_charges) else ()
    central_sites = [rc.start_site + s for s in rc.central]
    unperturbed = mask is None or not any(mask[s] for s in central_sites)
    return WallReport(
        position=rc.start_site + 1,
        k=rc.k,
        is_left_wall=left,
        is_right_wall=right,
        irreducible=left and is_irreducible(rc),
        G_left=gl,
        G_right=gr,
        charges=charges,
        interfering=not (splits_per_site(gl) and splits_per_site(gr)),
        unperturbed=unperturbed,
        classes=tuple(g.class_tag for g in rc.gates),
    )


def scan_circuit(c: FloquetCircuit, k_max: int, with_charges: bool = True) -> list[WallReport]:
    """All irreducible walls of width 1..k_max, found by sliding reduced windows."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    out = []
    for k in range(1, k_max + 1):
        for s in range(0, c.n - k - 1):
            rc = reduce_staircase(c, s, k, slicing="brickwork")
            # cheap necessary condition: both ends must be CZ-class
            if rc.gates[0].class_tag != cl.CZ or rc.gates[-1].class_tag != cl.CZ:
                continue
            if not is_wall(rc) or not is_irreducible(rc):
                continue
            out.append(wall_report(rc, c.perturbation_mask, with_charges))
    return out


# ---------------------------------------------------------------------------
# Fragmentation of a whole circuit


@dataclass
class FragmentDecomposition:
    fragments: list[tuple[int, int]]
    reach: list[int]
    boundaries: list[dict]

    @property
    def sizes(self) -> list[int]:
        return [b - a + 1 for a, b in self.fragments]

    def to_dict(self) -> dict:
        return {"fragments": [list(f) for f in self.fragments], "sizes": self.sizes,
                "boundaries": self.boundaries}


class _Closure:
    """Incrementally grown invariant subspace of the full chain."""

    def __init__(self, c: FloquetCircuit, respect_mask: bool):
        self.c = c
        self.eb = EchelonBasis()
        self.union = 0
        self.masked = {i for i, m in enumerate(c.perturbation_mask) if m} if respect_mask else set()
        self.activated: set[int] = set()
        self._step = _local_stepper(c)

    def add(self, seeds: Sequence[int]) -> None:
        frontier = [v for v in seeds if self._take(v)]
        while frontier:
            nxt = []
            for v in frontier:
                w = self._step(v)
                if self._take(w):
                    nxt.append(w)
                for s in support(w):
                    if s in self.masked and s not in self.activated:
                        self.activated.add(s)
                        for g in (1 << (2 * s), 1 << (2 * s + 1)):
                            if self._take(g):
                                nxt.append(g)
            frontier = nxt

    def _take(self, v: int) -> bool:
        if self.eb.add(v):
            self.union |= v
            return True
        return False

    def max_site(self) -> int:
        return (self.union.bit_length() - 1) // 2


def _local_stepper(c: FloquetCircuit):
    """One Clifford period applied only to gates near the operator's support."""
    layers = []
    for layer in c.layers:
        by_site: dict[int, list] = {}
        for sites, g in layer:
            by_site.setdefault(sites[0], []).append((sites, g))
        layers.append(by_site)
    n = c.n

    def step(v: int) -> int:
        if not v:
            return 0
        lo = ((v & -v).bit_length() - 1) // 2
        hi = (v.bit_length() - 1) // 2
        for by_site in layers:
            for s in range(max(lo - 1, 0), min(hi, n - 1) + 1):
                for sites, g in by_site.get(s, ()):
                    v, _ = cl.conjugate_bits(g, v, 0, sites)
            lo, hi = max(lo - 1, 0), min(hi + 1, n - 1)
        return v

    return step


def fragment_decomposition(c: FloquetCircuit, respect_mask: bool = True) -> FragmentDecomposition:
    """Split the chain into fragments bounded by walls.

    ``reach[i]`` is the rightmost site ever touched by operators initially on
    sites 0..i (under the Clifford part; with ``respect_mask`` a perturbed site
    mixes all of its local Paulis).  Consecutive fragments overlap on the wall's
    central sites.
    """
    clo = _Closure(c, respect_mask)
    reach = []
    for i in range(c.n):
        clo.add([1 << (2 * i), 1 << (2 * i + 1)])
        reach.append(max(clo.max_site(), i))
    fragments = []
    start = 0
    while True:
        end = reach[start]
        fragments.append((start, end))
        if end >= c.n - 1:
            break
        start = next(i for i in range(start, c.n) if reach[i] > end)
    boundaries = []
    for (a0, b0), (a1, b1) in zip(fragments, fragments[1:]):
        boundaries.append({"sites": [a1, b0], "width": b0 - a1 + 1})
    return FragmentDecomposition(fragments, reach, boundaries)


def left_invariant_subspace(c: FloquetCircuit, sites: Sequence[int], respect_mask: bool = True) -> GF2Subspace:
    """Closure of all local Paulis on ``sites`` (full-chain ambient space)."""
    clo = _Closure(c, respect_mask)
    seeds = []
    for s in sites:
        seeds += [1 << (2 * s), 1 << (2 * s + 1)]
    clo.add(seeds)
    return GF2Subspace(c.n, tuple(clo.eb.vectors()))


# ---------------------------------------------------------------------------
# Probabilities and length scales


def kwall_bounds(k: int) -> tuple[float, float]:
    """Interference-free lower bound and class-sequence upper bound on P(k-wall)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    lo, hi = kwall_bounds_exact(k)
    return float(lo), float(hi)


def kwall_bounds_exact(k: int) -> tuple[Fraction, Fraction]:
    if k < 1:
        raise ValueError("k must be at least 1")
    ends = Fraction(9, 19) ** 2
    return ends * Fraction(1, 9) * Fraction(6, 19) ** (k - 1), ends * Fraction(10, 19) ** (k - 1)


def _default_wall_probs() -> tuple[float, float]:
    from .enumeration import exact_1wall_probability, exact_2wall_probability

    return float(exact_1wall_probability()), float(exact_2wall_probability())


def stopping_probability(p: float, wall_probs: Sequence[float] | None = None) -> float:
    """Chance an operator is stopped within two steps: P1 (1-p) + P2 (1-p)^2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    p1, p2 = wall_probs if wall_probs is not None else _default_wall_probs()
    return p1 * (1 - p) + p2 * (1 - p) ** 2


def localisation_length(p: float, wall_probs: Sequence[float] | None = None, variant: str = "full") -> float:
    """Typical wall spacing 1/|ln(1 - s(p))|; ``variant="one_wall"`` drops the 2-wall term."""
    if variant not in ("full", "one_wall"):
        raise ValueError(f"unknown variant {variant!r}")
    probs = list(wall_probs) if wall_probs is not None else list(_default_wall_probs())
    if variant == "one_wall":
        probs[1] = 0.0
    s = stopping_probability(p, probs)
    if s <= 0.0:
        return math.inf
    return 1.0 / abs(math.log1p(-s))
