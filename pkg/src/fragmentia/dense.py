"""Exact state-vector and unitary simulation for small chains.

Covers Haar-perturbed evolution, entanglement traces for the three wall
setups, the spectral form factor with CUE references and smearing, the
single-qubit rotation autocorrelator, and the operator-Schmidt product test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import clifford as cl
from .circuit import FloquetCircuit, ReducedCircuit, build_floquet, haar_quaternion, quaternion_to_su2, substream
from .walls import is_wall

MAX_UNITARY_QUBITS = 12
MAX_STATE_QUBITS = 16
SETUPS = ("localisation", "perturbed_wall", "transport")


class ResourceGuard(ValueError):
    """Requested size exceeds the dense simulator's limits."""


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n,):
            raise ValueError("amplitude vector has the wrong length")
        if abs(np.linalg.norm(self.amplitudes) - 1) > 1e-10:
            raise ValueError("state is not normalised")

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        if n > MAX_STATE_QUBITS:
            raise ResourceGuard(f"state vectors limited to n <= {MAX_STATE_QUBITS}")
        psi = np.zeros(1 << n, dtype=complex)
        psi[0] = 1
        return cls(n, psi)

    def evolve(self, c: FloquetCircuit, periods: int = 1) -> "StateVector":
        psi = self.amplitudes[None, :]
        ops = circuit_ops(c)
        for _ in range(periods):
            psi = apply_ops(psi, c.n, ops)
        return StateVector(self.n, psi[0] / np.linalg.norm(psi[0]))


@dataclass
class DenseUnitary:
    n: int
    matrix: np.ndarray

    def unitarity_defect(self, probes: int = 4, rng: np.random.Generator | None = None) -> float:
        """max ||U v|| - 1 over random unit probes."""
        rng = rng or np.random.default_rng(0)
        v = rng.standard_normal((self.matrix.shape[0], probes)) + 1j * rng.standard_normal((self.matrix.shape[0], probes))
        v /= np.linalg.norm(v, axis=0)
        return float(np.max(np.abs(np.linalg.norm(self.matrix @ v, axis=0) - 1)))


# ---------------------------------------------------------------------------
# Gate application


_GATE_CACHE: dict = {}


def gate_matrix(g: cl.Clifford) -> np.ndarray:
    key = g.key()
    if key not in _GATE_CACHE:
        _GATE_CACHE[key] = cl.clifford_unitary(g)
    return _GATE_CACHE[key]


def circuit_ops(c: FloquetCircuit) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """One period as (sites, matrix) in application order: Cliffords, then rotations."""
    ops = [(sites, gate_matrix(g)) for sites, g in c.placements()]
    for i in sorted(c.rotations):
        ops.append(((i,), quaternion_to_su2(c.rotations[i])))
    return ops


def apply_ops(psi: np.ndarray, n: int, ops) -> np.ndarray:
    """Apply gates to a batch of states ``psi`` (B x 2^n).

    Each op is (sites, m) with m of shape (d, d) or (B, d, d); sites are adjacent.
    """
    b = psi.shape[0]
    for sites, m in ops:
        w = len(sites)
        a = 1 << sites[0]
        rest = 1 << (n - sites[0] - w)
        view = psi.reshape(b, a, 1 << w, rest)
        if m.ndim == 2:
            view = np.einsum("ij,bajr->bair", m, view)
        else:
            view = m[:, None] @ view
        psi = view.reshape(b, -1)
    return psi


def batch_ops(circuits: Sequence[FloquetCircuit]):
    """Stack the per-circuit ops of structurally identical circuits (rotations everywhere masked)."""
    per = [circuit_ops(c) for c in circuits]
    n = circuits[0].n
    # rotations differ in placement between realizations: pad with identities
    out = []
    for j, (sites, _) in enumerate(per[0][: len(list(circuits[0].placements()))]):
        out.append((sites, np.stack([ops[j][1] for ops in per])))
    rot = np.tile(np.eye(2, dtype=complex), (len(circuits), n, 1, 1))
    for r, c in enumerate(circuits):
        for i, q in c.rotations.items():
            rot[r, i] = quaternion_to_su2(q)
    if any(c.rotations for c in circuits):
        for i in range(n):
            out.append(((i,), rot[:, i]))
    return out


def build_unitary(c: FloquetCircuit) -> DenseUnitary:
    """U = R C_second C_first as a dense matrix."""
    if c.n > MAX_UNITARY_QUBITS:
        raise ResourceGuard(f"dense unitaries limited to n <= {MAX_UNITARY_QUBITS}")
    d = 1 << c.n
    cols = apply_ops(np.eye(d, dtype=complex), c.n, circuit_ops(c))
    return DenseUnitary(c.n, cols.T.copy())


def build_unitaries(circuits: Sequence[FloquetCircuit]) -> np.ndarray:
    """Stacked unitaries (R x D x D) of circuits sharing a layout."""
    n = circuits[0].n
    if n > MAX_UNITARY_QUBITS:
        raise ResourceGuard(f"dense unitaries limited to n <= {MAX_UNITARY_QUBITS}")
    d = 1 << n
    r = len(circuits)
    psi = np.tile(np.eye(d, dtype=complex), (r, 1, 1)).reshape(r * d, d)
    ops = [(s, np.repeat(m, d, axis=0)) for s, m in batch_ops(circuits)]
    out = apply_ops(psi, n, ops).reshape(r, d, d)
    return np.transpose(out, (0, 2, 1))


# ---------------------------------------------------------------------------
# Entanglement


def vn_entropy(psi, cut: int, n: int | None = None) -> np.ndarray | float:
    """Von Neumann entropy (bits) of sites [0, cut); accepts one state or a batch."""
    if isinstance(psi, StateVector):
        n, psi = psi.n, psi.amplitudes
    psi = np.asarray(psi)
    if n is None:
        n = int(round(math.log2(psi.shape[-1])))
    if not 1 <= cut <= n - 1:
        raise ValueError("both sides of the cut must be non-empty")
    m = psi.reshape(psi.shape[:-1] + (1 << cut, 1 << (n - cut)))
    s = np.linalg.svd(m, compute_uv=False)
    lam = s**2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 1e-14, -lam * np.log2(np.where(lam > 1e-14, lam, 1.0)), 0.0)
    out = terms.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def center_site(n: int) -> int:
    """Central wall qubit; the entropy cut sits just to its right."""
    return (n + 1) // 2 - 1


def _plant_wall(c: FloquetCircuit, rng: np.random.Generator) -> FloquetCircuit:
    s = center_site(c.n)
    while True:
        g0, g1 = cl.sample_nonproduct(rng), cl.sample_nonproduct(rng)
        if is_wall(ReducedCircuit(1, (g0, g1))):
            break
    return c.with_bond_gate(s - 1, g0).with_bond_gate(s, g1)


def _has_one_wall(c: FloquetCircuit) -> bool:
    from .circuit import reduce_staircase

    return any(is_wall(reduce_staircase(c, s, 1)) for s in range(c.n - 2))


def build_setup(setup: str, n: int, p: float, seed: int, realization: int = 0,
                even_first: bool = True) -> FloquetCircuit:
    """One realization of a wall experiment.

    localisation: a random 1-wall at the centre, central qubit unperturbed.
    perturbed_wall: same wall, central qubit always perturbed.
    transport: generic circuit with no 1-wall anywhere.
    """
    if setup not in SETUPS:
        raise ValueError(f"unknown setup {setup!r}; choose from {SETUPS}")
    if n < 3:
        raise ValueError("wall setups need n >= 3")
    if setup == "transport":
        attempt = 0
        while True:
            c = build_floquet(n, p, seed, realization, even_first=even_first, attempt=attempt)
            if not _has_one_wall(c):
                return c
            attempt += 1
    c = build_floquet(n, p, seed, realization, even_first=even_first)
    rng = substream(seed, realization, 1)
    c = _plant_wall(c, rng)
    s = center_site(n)
    mask = list(c.perturbation_mask)
    rot = dict(c.rotations)
    mask[s] = setup == "perturbed_wall"
    if mask[s]:
        rot.setdefault(s, haar_quaternion(rng))
    else:
        rot.pop(s, None)
    return c.with_mask(mask, rot)


@dataclass
class EntropyTrace:
    setup: str
    n: int
    p: float
    cut: int
    traces: np.ndarray  # realizations x (tmax + 1)
    exact_integer: bool = False

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.traces.shape[1])

    @property
    def mean(self) -> np.ndarray:
        return self.traces.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return self.traces.std(axis=0)

    def steady(self, start: int | None = None) -> tuple[float, float]:
        """Time-averaged mean and fluctuation over the second half of the trace."""
        start = self.traces.shape[1] // 2 if start is None else start
        return float(self.mean[start:].mean()), float(self.std[start:].mean())


def entropy_experiment(setup: str, n: int, p: float, realizations: int, tmax: int, seed: int,
                       chunk: int = 250, even_first: bool = True) -> EntropyTrace:
    """Half-chain entropy from |0...0> for an ensemble of setup circuits."""
    if setup not in SETUPS:
        raise ValueError(f"unknown setup {setup!r}; choose from {SETUPS}")
    if p > 0 and n > MAX_STATE_QUBITS:
        raise ResourceGuard(f"dense evolution limited to n <= {MAX_STATE_QUBITS}")
    cut = center_site(n) + 1
    circuits = [build_setup(setup, n, p, seed, r, even_first) for r in range(realizations)]
    if not any(any(c.perturbation_mask) for c in circuits):
        from .stabilizer import batch_entropy_traces

        traces = batch_entropy_traces(circuits, cut, tmax)
        return EntropyTrace(setup, n, p, cut, traces.astype(float), exact_integer=True)
    traces = np.empty((realizations, tmax + 1))
    d = 1 << n
    for lo in range(0, realizations, chunk):
        batch = circuits[lo:lo + chunk]
        ops = batch_ops(batch)
        psi = np.zeros((len(batch), d), dtype=complex)
        psi[:, 0] = 1
        for t in range(tmax + 1):
            traces[lo:lo + len(batch), t] = vn_entropy(psi, cut, n)
            psi = apply_ops(psi, n, ops)
        norms = np.linalg.norm(psi, axis=1)
        if np.max(np.abs(norms - 1)) > 1e-9:
            raise AssertionError("norm drift beyond 1e-9")
    return EntropyTrace(setup, n, p, cut, traces)


# ---------------------------------------------------------------------------
# Single-qubit rotation statistics

_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def autocorrelation(u: np.ndarray, sigma: str = "Z") -> np.ndarray:
    """|Tr[U s U^dag s]|^2 / 4 for one or a stack of 2x2 unitaries."""
    s = _PAULI[sigma]
    u = np.asarray(u)
    tr = np.trace(u @ s @ np.conj(np.swapaxes(u, -1, -2)) @ s, axis1=-2, axis2=-1)
    return np.abs(tr) ** 2 / 4


def haar_su2_batch(rng: np.random.Generator, size: int) -> np.ndarray:
    q = rng.standard_normal((size, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    a, b, c, d = q.T
    u = np.empty((size, 2, 2), dtype=complex)
    u[:, 0, 0] = a + 1j * b
    u[:, 0, 1] = c + 1j * d
    u[:, 1, 0] = -c + 1j * d
    u[:, 1, 1] = a - 1j * b
    return u


def rotation_autocorrelator(samples: int, rng: np.random.Generator, sigma: str = "Z",
                            return_stderr: bool = False, chunk: int = 250_000):
    """Haar average of the single-site Pauli autocorrelation."""
    if samples < 1:
        raise ValueError("need at least one sample")
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        v = autocorrelation(haar_su2_batch(rng, m), sigma)
        total += float(v.sum())
        total_sq += float((v**2).sum())
        done += m
    mean = total / samples
    if not return_stderr:
        return mean
    var = max(total_sq / samples - mean**2, 0.0)
    return mean, math.sqrt(var / samples)


# ---------------------------------------------------------------------------
# Spectral form factor


@dataclass
class SFFTrace:
    t: np.ndarray
    K: np.ndarray
    dK: np.ndarray
    ensemble_size: int
    D: int
    K_smeared: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)


def eigenphases(u: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    lam = np.linalg.eigvals(u)
    if np.max(np.abs(np.abs(lam) - 1)) > tol:
        raise ValueError("spectrum is off the unit circle: input is not unitary")
    return np.angle(lam)


def traces_from_phases(phases: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Tr[U^t] = sum_a exp(i theta_a t), shape (R, len(t))."""
    out = np.empty((phases.shape[0], len(t)), dtype=complex)
    for j, tt in enumerate(t):
        out[:, j] = np.exp(1j * phases * tt).sum(axis=1)
    return out


def _as_matrix(u) -> np.ndarray:
    return u.matrix if isinstance(u, DenseUnitary) else np.asarray(u)


def sff(ensemble: Iterable, tmax: int, rng: np.random.Generator | None = None,
        check_points: int = 3) -> SFFTrace:
    """K(t) and dK(t) over an ensemble of unitaries, t = 0..tmax."""
    rng = rng or np.random.default_rng(0)
    t = np.arange(tmax + 1)
    phases = []
    first = None
    for u in ensemble:
        m = _as_matrix(u)
        if first is None:
            first = m
        phases.append(eigenphases(m))
    if not phases:
        raise ValueError("empty ensemble")
    phases = np.array(phases)
    tr = traces_from_phases(phases, t)
    _cross_check(first, phases[0], rng, tmax, check_points)
    d = phases.shape[1]
    mod2 = np.abs(tr) ** 2
    k = mod2.mean(axis=0)
    dk = np.sqrt(np.maximum((mod2**2).mean(axis=0) - k**2, 0.0))
    k[0] = float(d * d)
    return SFFTrace(t, k, dk, len(phases), d)


def _cross_check(u: np.ndarray, phases: np.ndarray, rng: np.random.Generator, tmax: int, points: int) -> None:
    if tmax < 1 or points < 1:
        return
    for tt in rng.choice(np.arange(1, tmax + 1), size=min(points, tmax), replace=False):
        spec = np.exp(1j * phases * tt).sum()
        direct = np.trace(np.linalg.matrix_power(u, int(tt)))
        if abs(spec - direct) > 1e-6 * max(abs(direct), 1.0):
            raise AssertionError(f"spectral and matrix-power traces disagree at t={tt}")


def cue_reference(D: int, tmax: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact circular-unitary-ensemble K(t) and dK(t) for t = 0..tmax."""
    if D < 2:
        raise ValueError("D must be at least 2")
    t = np.arange(tmax + 1, dtype=float)
    k = np.where(t <= D, t, float(D))
    k[0] = float(D * D)
    dk = np.where(t < D / 2, t, np.where(t < D, np.sqrt(np.maximum(t**2 - 2 * t + D, 0.0)), math.sqrt(D * D - D)))
    dk[0] = 0.0
    return k, dk


def fragmentation_ansatz(t):
    t = np.asarray(t, dtype=float)
    return t**2 + 4 * t


def gaussian_smear(K: np.ndarray, dt: int, rng: np.random.Generator) -> np.ndarray:
    """Half the raw value plus half the window average of Gaussian draws.

    Each draw N(t') has mean K(t') and standard deviation equal to the spread
    of K over the (edge-clipped) window around t.  Constants are fixed points.
    """
    if dt < 0:
        raise ValueError("window half-width must be non-negative")
    K = np.asarray(K, dtype=float)
    out = np.empty_like(K)
    for i in range(len(K)):
        lo, hi = max(0, i - dt), min(len(K), i + dt + 1)
        win = K[lo:hi]
        noise = rng.normal(win, win.std())
        out[i] = 0.5 * K[i] + 0.5 * noise.mean()
    return out


SMEARING_METADATA = {"smearing": "window-normalised", "draw_mean": "K(t')", "draw_sd": "std of window"}


def ramp_exponent(t: np.ndarray, K: np.ndarray, lo: float, hi: float) -> float:
    """Least-squares slope of log K against log t on [lo, hi]."""
    t = np.asarray(t, dtype=float)
    sel = (t >= lo) & (t <= hi) & (np.asarray(K) > 0)
    slope, _ = np.polyfit(np.log(t[sel]), np.log(np.asarray(K)[sel]), 1)
    return float(slope)


def sff_experiment(setup: str, n: int, p: float, realizations: int, tmax: int, seed: int,
                   dt: int = 1, chunk: int = 50, even_first: bool = True) -> SFFTrace:
    """SFF of the first-period unitaries of an ensemble of setup circuits, plus smearing."""
    if n > MAX_UNITARY_QUBITS:
        raise ResourceGuard(f"dense unitaries limited to n <= {MAX_UNITARY_QUBITS}")

    def stream():
        for lo in range(0, realizations, chunk):
            cs = [build_setup(setup, n, p, seed, r, even_first) for r in range(lo, min(realizations, lo + chunk))]
            yield from build_unitaries(cs)

    out = sff(stream(), tmax, rng=substream(seed, realizations, 2))
    # t=0 carries D^2 and stays out of every window
    out.K_smeared = np.concatenate([out.K[:1], gaussian_smear(out.K[1:], dt, substream(seed, realizations, 3))])
    out.metadata = dict(SMEARING_METADATA, dt=dt, setup=setup, n=n, p=p, seed=seed, realizations=realizations)
    return out


# ---------------------------------------------------------------------------
# Operator-Schmidt product test


def operator_schmidt_values(u: np.ndarray, cut: int, n: int | None = None) -> np.ndarray:
    u = _as_matrix(u)
    if n is None:
        n = int(round(math.log2(u.shape[0])))
    if not 1 <= cut <= n - 1:
        raise ValueError("cut must split the qubits into two non-empty parts")
    da, db = 1 << cut, 1 << (n - cut)
    r = u.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    return np.linalg.svd(r, compute_uv=False)


def otoc_product_test(u, cut: int = 1, tol: float = 1e-9) -> tuple[np.ndarray, bool]:
    """Operator-Schmidt values across ``cut`` and whether U is a product there."""
    sv = operator_schmidt_values(u, cut)
    return sv, bool(np.sum(sv > tol * max(sv[0], 1.0)) == 1)


def schmidt_defect(sv: np.ndarray) -> float:
    """(sum s^2)^2 - sum s^4; zero exactly for product operators."""
    s2 = sv**2
    return float(s2.sum() ** 2 - (s2**2).sum())
