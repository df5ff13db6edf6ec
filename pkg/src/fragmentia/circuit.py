"""Brickwork Floquet-Clifford circuits with stochastic single-qubit perturbations.

One period applies the first brickwork layer, then the second, then a Haar SU(2)
rotation on every masked site.  Sites left uncovered by a two-qubit gate at the
chain edges receive a uniformly random single-qubit Clifford.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import clifford as cl
from .gf2 import PauliString, SymplecticMatrix

Placement = tuple[tuple[int, ...], cl.Clifford]


def substream(seed: int, *index: int) -> np.random.Generator:
    """Independent generator keyed by ``index`` (e.g. realization) under master ``seed``."""
    key = tuple(int(i) for i in index) or (0,)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))


def haar_quaternion(rng: np.random.Generator) -> tuple[float, float, float, float]:
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    return tuple(float(x) for x in q)


def quaternion_to_su2(q: Sequence[float]) -> np.ndarray:
    a, b, c, d = q
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def bonds(n: int, offset: int) -> list[int]:
    return list(range(offset, n - 1, 2))


@dataclass(frozen=True)
class FloquetCircuit:
    n: int
    even_layer: tuple[Placement, ...]
    odd_layer: tuple[Placement, ...]
    perturbation_mask: tuple[bool, ...]
    rotations: dict[int, tuple[float, float, float, float]] = field(default_factory=dict)
    seed: int | None = None
    p: float = 0.0
    even_first: bool = True

    def __post_init__(self):
        if len(self.perturbation_mask) != self.n:
            raise ValueError("mask length must equal n")
        if set(self.rotations) != {i for i, m in enumerate(self.perturbation_mask) if m}:
            raise ValueError("rotations must be given exactly on masked sites")
        for q in self.rotations.values():
            if abs(sum(x * x for x in q) - 1.0) > 1e-12:
                raise ValueError("rotation quaternion is not unit norm")

    @property
    def layers(self) -> tuple[tuple[Placement, ...], tuple[Placement, ...]]:
        """Clifford layers in application order."""
        return (self.even_layer, self.odd_layer) if self.even_first else (self.odd_layer, self.even_layer)

    def placements(self):
        for layer in self.layers:
            yield from layer

    def bond_gate(self, i: int) -> cl.TwoQubitClifford:
        """The two-qubit gate on bond (i, i+1)."""
        for layer in (self.even_layer, self.odd_layer):
            for sites, g in layer:
                if sites == (i, i + 1):
                    return g
        raise IndexError(f"no gate on bond ({i}, {i + 1})")

    def bond_layer(self, i: int) -> int:
        """0 if the gate on bond (i, i+1) is applied first within a period, else 1."""
        first = 0 if self.even_first else 1
        return 0 if i % 2 == first else 1

    def with_bond_gate(self, i: int, gate: cl.TwoQubitClifford) -> "FloquetCircuit":
        def swap(layer):
            return tuple((s, gate) if s == (i, i + 1) else (s, g) for s, g in layer)

        self.bond_gate(i)
        return replace(self, even_layer=swap(self.even_layer), odd_layer=swap(self.odd_layer))

    def with_mask(self, mask: Sequence[bool], rotations: dict) -> "FloquetCircuit":
        return replace(self, perturbation_mask=tuple(bool(m) for m in mask), rotations=dict(rotations))

    def evolve_bits(self, bits: int, phase: int = 0, periods: int = 1) -> tuple[int, int]:
        """Heisenberg evolution ``U_C P U_C^dag`` of a Pauli under the Clifford part."""
        layers = self.layers
        for _ in range(periods):
            for layer in layers:
                for sites, g in layer:
                    bits, phase = cl.conjugate_bits(g, bits, phase, sites)
        return bits, phase

    def evolve_pauli(self, p: PauliString, periods: int = 1) -> PauliString:
        if p.n != self.n:
            raise ValueError("qubit count mismatch")
        bits, phase = self.evolve_bits(p.bits, p.phase_exp, periods)
        return PauliString(self.n, bits, phase)

    def step(self, v: int) -> int:
        return self.evolve_bits(v)[0]

    def to_json(self) -> str:
        gates = []
        for layer_id, layer in (("even", self.even_layer), ("odd", self.odd_layer)):
            for sites, g in layer:
                gates.append({"layer": layer_id, "sites": list(sites), "gate": _gate_text(g)})
        doc = {
            "n": self.n,
            "p": self.p,
            "seed": self.seed,
            "even_first": self.even_first,
            "gates": gates,
            "mask": [bool(m) for m in self.perturbation_mask],
            "quaternions": [list(self.rotations[i]) for i in sorted(self.rotations)],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "FloquetCircuit":
        doc = json.loads(text)
        layers = {"even": [], "odd": []}
        for item in doc["gates"]:
            layers[item["layer"]].append((tuple(item["sites"]), _gate_from_text(item["gate"])))
        masked = [i for i, m in enumerate(doc["mask"]) if m]
        rot = {i: tuple(q) for i, q in zip(masked, doc["quaternions"])}
        return cls(
            n=doc["n"],
            even_layer=tuple(layers["even"]),
            odd_layer=tuple(layers["odd"]),
            perturbation_mask=tuple(doc["mask"]),
            rotations=rot,
            seed=doc["seed"],
            p=doc["p"],
            even_first=doc.get("even_first", True),
        )


def _gate_text(g: cl.Clifford) -> str:
    if g.n == 1:
        return f"C1:{cl.enumerate_c1().index(g)}"
    return cl.gate_to_text(g)


def _gate_from_text(text: str) -> cl.Clifford:
    if text.startswith("C1:"):
        return cl.enumerate_c1()[int(text[3:])]
    return cl.gate_from_text(text)


def _layer(n: int, offset: int, draw_two, draw_one) -> tuple[Placement, ...]:
    covered = set()
    out = []
    for i in bonds(n, offset):
        out.append(((i, i + 1), draw_two()))
        covered |= {i, i + 1}
    for s in range(n):
        if s not in covered:
            out.append(((s,), draw_one()))
    return tuple(out)


def build_floquet(n: int, p: float, seed: int, realization: int = 0, even_first: bool = True,
                  sampler=cl.sample_nonproduct, attempt: int = 0) -> FloquetCircuit:
    """Sample one period: non-product Cliffords on every bond, Bernoulli(p) mask, Haar rotations."""
    if n < 2:
        raise ValueError("need at least two qubits")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = substream(seed, realization, attempt) if attempt else substream(seed, realization)
    even = _layer(n, 0, lambda: sampler(rng), lambda: cl.sample_c1(rng))
    odd = _layer(n, 1, lambda: sampler(rng), lambda: cl.sample_c1(rng))
    mask = tuple(bool(x) for x in rng.random(n) < p)
    rot = {i: haar_quaternion(rng) for i in range(n) if mask[i]}
    return FloquetCircuit(n, even, odd, mask, rot, seed=seed, p=p, even_first=even_first)


def circuit_from_bond_gates(n: int, gates: dict[int, cl.Clifford] | Sequence[cl.Clifford],
                            edge: cl.Clifford | None = None, even_first: bool = True) -> FloquetCircuit:
    """Deterministic circuit from explicit bond gates (``gates[i]`` acts on (i, i+1)); edges get ``edge``."""
    if not isinstance(gates, dict):
        gates = dict(enumerate(gates))
    edge = edge or cl.enumerate_c1()[0]
    if sorted(gates) != list(range(n - 1)):
        raise ValueError("need a gate on every bond")
    even = _layer(n, 0, lambda: None, lambda: edge)
    odd = _layer(n, 1, lambda: None, lambda: edge)

    def fill(layer):
        return tuple(((s, gates[s[0]]) if len(s) == 2 else (s, g)) for s, g in layer)

    return FloquetCircuit(n, fill(even), fill(odd), (False,) * n, {}, even_first=even_first)


def symplectic_image(c: FloquetCircuit) -> tuple[SymplecticMatrix, tuple[int, ...]]:
    """Symplectic matrix of the Clifford part of one period plus the sign of each generator image."""
    cols = []
    signs = []
    for j in range(2 * c.n):
        bits, phase = c.evolve_bits(1 << j, 0)
        img = PauliString(c.n, bits, phase)
        cols.append(bits)
        signs.append(img.hermitian_sign // 2)
    return SymplecticMatrix.from_columns(cols), tuple(signs)


# ---------------------------------------------------------------------------
# Reduced circuits


@dataclass(frozen=True)
class ReducedCircuit:
    """k+1 gates on k+2 sites; gate j acts on local sites (j, j+1).

    ``schedule`` lists the gate indices applied in each sub-layer of one period.
    The staircase schedule applies gate 0, then 1, ..., then k.
    """

    k: int
    gates: tuple[cl.TwoQubitClifford, ...]
    schedule: tuple[tuple[int, ...], ...] = ()
    start_site: int = 0

    def __post_init__(self):
        if len(self.gates) != self.k + 1:
            raise ValueError("a width-k window needs k+1 gates")
        if not self.schedule:
            object.__setattr__(self, "schedule", tuple((j,) for j in range(self.k + 1)))

    @property
    def nsites(self) -> int:
        return self.k + 2

    @property
    def central(self) -> tuple[int, ...]:
        return tuple(range(1, self.k + 1))

    def evolve_bits(self, bits: int, phase: int = 0, periods: int = 1) -> tuple[int, int]:
        for _ in range(periods):
            for layer in self.schedule:
                for j in layer:
                    bits, phase = cl.conjugate_bits(self.gates[j], bits, phase, (j, j + 1))
        return bits, phase

    def step(self, v: int) -> int:
        return self.evolve_bits(v)[0]

    @property
    def symp(self) -> SymplecticMatrix:
        return SymplecticMatrix.from_columns([self.step(1 << j) for j in range(2 * self.nsites)])

    def sub(self, first: int, last: int) -> "ReducedCircuit":
        """Window made of gates ``first..last`` (inclusive)."""
        idx = range(first, last + 1)
        sched = tuple(tuple(j - first for j in layer if j in idx) for layer in self.schedule)
        sched = tuple(layer for layer in sched if layer)
        return ReducedCircuit(last - first, tuple(self.gates[j] for j in idx), sched, self.start_site + first)

    def mirrored(self) -> "ReducedCircuit":
        """Spatial reflection: site s -> k+1-s."""
        swap = cl.representative(cl.SWAP)
        gates = tuple(swap @ g @ swap for g in reversed(self.gates))
        sched = tuple(tuple(self.k - j for j in layer) for layer in self.schedule)
        return ReducedCircuit(self.k, gates, sched, self.start_site)


def reduce_staircase(c: FloquetCircuit, start_site: int, k: int, slicing: str = "staircase") -> ReducedCircuit:
    """Gates on bonds start_site .. start_site+k, i.e. sites [start_site, start_site+k+1].

    ``slicing="brickwork"`` keeps the circuit's own layer order instead of the
    staircase; both give the same wall verdicts, but only the brickwork slicing
    reproduces the actual Floquet orbits of central operators.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if start_site < 0 or start_site + k + 1 >= c.n:
        raise IndexError(f"window [{start_site}, {start_site + k + 1}] outside chain of {c.n} sites")
    gates = tuple(c.bond_gate(start_site + j) for j in range(k + 1))
    if slicing == "staircase":
        sched = tuple((j,) for j in range(k + 1))
    elif slicing == "brickwork":
        first = tuple(j for j in range(k + 1) if c.bond_layer(start_site + j) == 0)
        second = tuple(j for j in range(k + 1) if c.bond_layer(start_site + j) == 1)
        sched = tuple(layer for layer in (first, second) if layer)
    else:
        raise ValueError(f"unknown slicing {slicing!r}")
    return ReducedCircuit(k, gates, sched, start_site)
