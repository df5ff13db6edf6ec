"""Exact and Monte Carlo probabilities that random gate windows form walls.

Gates are i.i.d. uniform over the non-product two-qubit symplectics.  Exact
values come from a dressing census: each gate is a class representative dressed
by single-qubit symplectics, and on every central site the two legs meeting
between consecutive gates collapse into one uniform single-qubit element.
Legs on the two boundary sites never change a wall verdict, so a width-k
template needs 6**(2k) dressings.
"""
from __future__ import annotations

import csv
import functools
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import clifford as cl
from .circuit import ReducedCircuit
from .gf2 import SymplecticMatrix
from .walls import internal_subspaces, is_irreducible, is_wall, kwall_bounds, splits_per_site


def class_probabilities() -> dict[str, Fraction]:
    """Class weights of a uniform non-product gate (9:1:9)."""
    census = cl.class_census()
    total = sum(census[t] for t in cl.NONPRODUCT_CLASSES)
    return {t: Fraction(census[t], total) for t in cl.NONPRODUCT_CLASSES}


def _dressed_symplectics(tags, legs) -> list[SymplecticMatrix]:
    """Gate j = rep_j (d_j (x) e_{j+1}); ``legs`` = (d_1, e_1, d_2, e_2, ...)."""
    k = len(tags) - 1
    d = [None] + [legs[2 * j] for j in range(k)]
    e = [legs[2 * j + 1] for j in range(k)] + [None]
    return [_dressed(t, d[j], e[j]) for j, t in enumerate(tags)]


@functools.lru_cache(maxsize=None)
def _dressed(tag: str, a: int | None, b: int | None) -> SymplecticMatrix:
    sp2 = cl.enumerate_sp2()
    ident = SymplecticMatrix.identity(1)
    left = ident if a is None else sp2[a]
    right = ident if b is None else sp2[b]
    return cl.representative(tag).symp @ cl.product_symplectic(left, right)


def _dressed_window(tags, legs) -> ReducedCircuit:
    gates = tuple(cl.gate_from_symplectic(m) for m in _dressed_symplectics(tags, legs))
    return ReducedCircuit(len(gates) - 1, gates)


@dataclass
class DressingCensus:
    k: int
    tags: tuple[str, ...]
    total: int
    hits: int
    interference_free: int
    interfering: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.hits, self.total)


@functools.lru_cache(maxsize=None)
def _nonproduct_index() -> dict[tuple[int, ...], int]:
    return {m.rows: i for i, m in enumerate(cl.nonproduct_sp4())}


@functools.lru_cache(maxsize=None)
def dressing_census(tags) -> DressingCensus:
    """Count dressings of a class template that form an irreducible wall."""
    tags = tuple(tags)
    k = len(tags) - 1
    if k < 1:
        raise ValueError("a wall template needs at least two gates")
    lookup = _nonproduct_index()
    all_legs = list(itertools.product(range(6), repeat=2 * k))
    idx = np.array([[lookup[m.rows] for m in _dressed_symplectics(tags, legs)] for legs in all_legs])
    hit = batch_irreducible_walls(idx)
    free = 0
    for i in np.flatnonzero(hit):
        gl, gr = internal_subspaces(_dressed_window(tags, all_legs[i]))
        free += splits_per_site(gl) and splits_per_site(gr)
    hits = int(hit.sum())
    return DressingCensus(k, tags, len(all_legs), hits, free, hits - free)


@functools.lru_cache(maxsize=None)
def exact_kwall_probability(k: int) -> Fraction:
    """P(a given window of k+1 i.i.d. non-product gates is an irreducible k-wall)."""
    probs = class_probabilities()
    out = Fraction(0)
    for tags in itertools.product(cl.NONPRODUCT_CLASSES, repeat=k + 1):
        weight = math.prod(probs[t] for t in tags)
        out += weight * dressing_census(tags).fraction
    return out


def exact_1wall_probability() -> Fraction:
    return exact_kwall_probability(1)


def exact_2wall_probability() -> Fraction:
    return exact_kwall_probability(2)


def enumerate_fswap_2walls() -> dict:
    """Census of CZ-FSWAP-CZ dressings, in units of 1/81 of the dressing space."""
    c = dressing_census((cl.CZ, cl.FSWAP, cl.CZ))
    unit = c.total // 81
    return {
        "total": c.total,
        "hits": c.hits,
        "interference_free": c.interference_free,
        "interfering": c.interfering,
        "interference_free_units": Fraction(c.interference_free, unit),
        "interfering_units": Fraction(c.interfering, unit),
    }


def two_wall_breakdown() -> dict[str, Fraction]:
    """Exact 2-wall probability split by the middle gate's class."""
    probs = class_probabilities()
    out = {}
    for mid in cl.NONPRODUCT_CLASSES:
        tags = (cl.CZ, mid, cl.CZ)
        out[mid] = probs[cl.CZ] ** 2 * probs[mid] * dressing_census(tags).fraction
    return out


# ---------------------------------------------------------------------------
# Vectorised Monte Carlo


def _nonproduct_table() -> np.ndarray:
    """table[g, v] = image of 4-bit local vector v under non-product symplectic g."""
    mats = cl.nonproduct_sp4()
    tab = np.zeros((len(mats), 16), dtype=np.uint16)
    for i, m in enumerate(mats):
        cols = m.columns
        for v in range(16):
            w = 0
            for j in range(4):
                if v >> j & 1:
                    w ^= cols[j]
            tab[i, v] = w
    return tab


def _apply_gate(tab, idx, v, site):
    shift = np.uint16(2 * site)
    local = (v >> shift) & np.uint16(15)
    new = tab[idx, local]
    return v ^ ((local ^ new) << shift)


def _batch_is_wall(tab, gate_idx: np.ndarray, first: int, last: int) -> np.ndarray:
    """Left-wall verdict for the staircase of gates first..last (columns of ``gate_idx``)."""
    width = last - first
    nsites = width + 2
    rmask = np.uint16(0b11 << (2 * (nsites - 1)))
    n = gate_idx.shape[0]
    ok = np.ones(n, dtype=bool)
    for seed in (1, 2):
        v = np.full(n, seed, dtype=np.uint16)
        # Krylov sequence of length 2*nsites spans the whole closure
        for _ in range(2 * nsites):
            for j in range(width + 1):
                v = _apply_gate(tab, gate_idx[:, first + j], v, j)
            ok &= (v & rmask) == 0
    return ok


def batch_irreducible_walls(gate_idx: np.ndarray, tab: np.ndarray | None = None) -> np.ndarray:
    """Rows of non-product gate indices (k+1 columns) forming irreducible k-walls."""
    tab = _nonproduct_table() if tab is None else tab
    k = gate_idx.shape[1] - 1
    hit = _batch_is_wall(tab, gate_idx, 0, k)
    for width in range(1, k):
        for a in range(k + 1 - width):
            if not hit.any():
                return hit
            hit &= ~_batch_is_wall(tab, gate_idx, a, a + width)
    return hit


@dataclass
class WallCensus:
    """Monte Carlo wall count; ``exact`` is filled in when a closed form is known."""

    k: int
    samples: int
    hits: int
    exact: float | None = None
    hit_rows: list = field(default_factory=list, repr=False)

    @property
    def estimate(self) -> float:
        return self.hits / self.samples

    @property
    def stderr(self) -> float:
        p = self.estimate
        # floor keeps the error finite when no hits were seen
        return math.sqrt(max(p * (1 - p), 1.0 / self.samples) / self.samples)

    @property
    def sigma_deviation(self) -> float | None:
        if self.exact is None:
            return None
        return (self.estimate - self.exact) / self.stderr

    def row(self) -> dict:
        lo, hi = kwall_bounds(self.k)
        return {
            "k": self.k,
            "samples": self.samples,
            "hits": self.hits,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "exact": "" if self.exact is None else self.exact,
            "sigma_deviation": "" if self.exact is None else self.sigma_deviation,
            "lower_bound": lo,
            "upper_bound": hi,
        }


def montecarlo_wall_prob(k: int, n_samples: int, rng: np.random.Generator, chunk: int = 200_000,
                         keep_hits: bool = False) -> WallCensus:
    """Count irreducible k-walls among ``n_samples`` random (k+1)-gate staircases."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    tab = _nonproduct_table()
    hits = 0
    rows = []
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        idx = rng.integers(0, tab.shape[0], size=(m, k + 1))
        h = batch_irreducible_walls(idx, tab)
        hits += int(h.sum())
        if keep_hits:
            rows.extend(idx[h].tolist())
        done += m
    exact = float(exact_kwall_probability(k)) if k <= 2 else None
    return WallCensus(k, n_samples, hits, exact, rows)


def window_from_indices(indices) -> ReducedCircuit:
    mats = cl.nonproduct_sp4()
    gates = tuple(cl.gate_from_symplectic(mats[i]) for i in indices)
    return ReducedCircuit(len(gates) - 1, gates)


def write_csv(rows: list[dict], path: str | Path, manifest: dict | None = None) -> None:
    """CSV plus a ``.json`` sidecar manifest."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(manifest or {}, indent=2, sort_keys=True))
