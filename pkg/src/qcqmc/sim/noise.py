"""Stochastic Pauli noise, computational-basis sampling and a density-matrix oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ResourceError
from .circuit import Circuit, Gate, gate_matrix
from .statevector import apply_circuit, apply_gate, apply_matrix, apply_pauli_codes, probabilities

_PAULI = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}
MAX_BATCH = 4096
ORACLE_MAX_QUBITS = 6


def _check_triple(t) -> tuple[float, float, float]:
    t = tuple(float(v) for v in t)
    if len(t) != 3 or min(t) < 0 or max(t) > 1 or sum(t) > 1 + 1e-12:
        raise ValueError(f"invalid Pauli error triple {t}")
    return t


@dataclass
class PauliNoiseModel:
    """Pauli errors ``(p_X, p_Y, p_Z)`` on each touched qubit after every gate.

    ``per_gate`` overrides the default triple for a gate name.  ``readout``
    is a bit-flip probability (scalar or per qubit).  ``global_depolarizing``
    replaces the whole register by the maximally mixed state with the given
    probability just before readout.  ``coherent_rz`` adds a fixed Z
    over-rotation after every gate, which is not a Pauli channel.
    """

    default: tuple[float, float, float] = (0.0, 0.0, 0.0)
    per_gate: dict[str, tuple[float, float, float]] = field(default_factory=dict)
    readout: float | list[float] = 0.0
    include_state_prep: bool = True
    global_depolarizing: float = 0.0
    coherent_rz: float = 0.0

    def __post_init__(self):
        self.default = _check_triple(self.default)
        self.per_gate = {k: _check_triple(v) for k, v in self.per_gate.items()}
        ro = np.atleast_1d(np.asarray(self.readout, dtype=float))
        if np.any(ro < 0) or np.any(ro > 1):
            raise ValueError("readout flip probability outside [0, 1]")
        if not 0 <= self.global_depolarizing <= 1:
            raise ValueError("global depolarizing probability outside [0, 1]")

    def triple(self, gate: Gate) -> tuple[float, float, float]:
        return self.per_gate.get(gate.name, self.default)

    @property
    def has_gate_noise(self) -> bool:
        return (
            sum(self.default) > 0
            or any(sum(t) > 0 for t in self.per_gate.values())
            or self.coherent_rz != 0
        )

    def readout_probs(self, n: int) -> np.ndarray:
        ro = np.atleast_1d(np.asarray(self.readout, dtype=float))
        return np.broadcast_to(ro, (n,)) if ro.size == 1 else ro

    def to_dict(self) -> dict:
        ro = self.readout if np.isscalar(self.readout) else list(self.readout)
        return {
            "default": list(self.default),
            "per_gate": {k: list(v) for k, v in self.per_gate.items()},
            "readout": ro,
            "include_state_prep": self.include_state_prep,
            "global_depolarizing": self.global_depolarizing,
            "coherent_rz": self.coherent_rz,
        }

    @classmethod
    def from_dict(cls, d: dict | None) -> "PauliNoiseModel | None":
        if d is None:
            return None
        return cls(
            default=tuple(d.get("default", (0.0, 0.0, 0.0))),
            per_gate={k: tuple(v) for k, v in d.get("per_gate", {}).items()},
            readout=d.get("readout", 0.0),
            include_state_prep=bool(d.get("include_state_prep", True)),
            global_depolarizing=float(d.get("global_depolarizing", 0.0)),
            coherent_rz=float(d.get("coherent_rz", 0.0)),
        )


@dataclass(frozen=True)
class MeasurementRecord:
    bitstring: str
    multiplicity: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be at least 1")


def _draw_outcomes(psi_batch: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(probabilities(psi_batch), axis=1)
    u = rng.random((psi_batch.shape[0], 1))
    return np.minimum(np.sum(cum <= u, axis=1), psi_batch.shape[1] - 1)


def _noisy_outcomes(psi, circuit, noise, shots, rng) -> np.ndarray:
    n = circuit.n_qubits
    out = []
    rz = None
    if noise.coherent_rz:
        rz = gate_matrix(Gate("RZ", (0,), (noise.coherent_rz,)))
    for start in range(0, shots, MAX_BATCH):
        b = min(MAX_BATCH, shots - start)
        batch = np.repeat(psi[None], b, axis=0)
        for g in circuit.gates:
            batch = apply_gate(batch, g)
            px, py, pz = noise.triple(g)
            for q in g.qubits:
                if rz is not None:
                    batch = apply_matrix(batch, rz, (q,))
                if px + py + pz > 0:
                    codes = rng.choice(4, size=b, p=[1 - px - py - pz, px, py, pz])
                    batch = apply_pauli_codes(batch, q, codes)
        out.append(_draw_outcomes(batch, rng))
    return np.concatenate(out)


def _post_measurement(outcomes, n, noise, rng) -> np.ndarray:
    if noise is None:
        return outcomes
    if noise.global_depolarizing > 0:
        hit = rng.random(outcomes.size) < noise.global_depolarizing
        outcomes = np.where(hit, rng.integers(0, 1 << n, size=outcomes.size), outcomes)
    ro = noise.readout_probs(n)
    if np.any(ro > 0):
        flips = rng.random((outcomes.size, n)) < ro[None, :]
        weights = 1 << np.arange(n - 1, -1, -1)
        outcomes = outcomes ^ (flips.astype(np.int64) @ weights)
    return outcomes


def sample_outcomes(
    psi: np.ndarray,
    shots: int,
    noise: PauliNoiseModel | None = None,
    circuit: Circuit | None = None,
    rng: np.random.Generator | int | None = None,
) -> np.ndarray:
    """Integer outcomes (qubit 0 most significant) of measuring ``circuit|psi>``."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(rng)
    n = psi.shape[-1].bit_length() - 1
    if circuit is None:
        circuit = Circuit(n)
    if noise is not None and noise.has_gate_noise:
        outcomes = _noisy_outcomes(psi, circuit, noise, shots, rng)
    else:
        p = probabilities(apply_circuit(psi, circuit))
        counts = rng.multinomial(shots, p)
        outcomes = np.repeat(np.arange(p.size), counts)
    return _post_measurement(outcomes, n, noise, rng)


def outcomes_to_counts(outcomes: np.ndarray, n: int) -> dict[str, int]:
    vals, cnt = np.unique(outcomes, return_counts=True)
    return {format(int(v), f"0{n}b"): int(c) for v, c in zip(vals, cnt)}


def sample_measurements(psi, shots, noise=None, circuit=None, rng=None) -> list[MeasurementRecord]:
    """Sample ``shots`` computational-basis outcomes; one record per distinct bitstring."""
    n = psi.shape[-1].bit_length() - 1
    counts = outcomes_to_counts(sample_outcomes(psi, shots, noise, circuit, rng), n)
    return [MeasurementRecord(b, c) for b, c in counts.items()]


def exact_outcome_distribution(
    psi: np.ndarray, circuit: Circuit, noise: PauliNoiseModel | None = None
) -> np.ndarray:
    """Dense density-matrix evolution of the same noise model (test oracle)."""
    n = circuit.n_qubits
    if n > ORACLE_MAX_QUBITS:
        raise ResourceError(f"density-matrix oracle capped at {ORACLE_MAX_QUBITS} qubits")
    dim = 1 << n
    rho = np.outer(psi, psi.conj())

    for g in circuit.gates:
        u = g.matrix()
        rho = _conj_full(rho, u, g.qubits)
        if noise is None:
            continue
        px, py, pz = noise.triple(g)
        for q in g.qubits:
            if noise.coherent_rz:
                rho = _conj_full(rho, gate_matrix(Gate("RZ", (0,), (noise.coherent_rz,))), (q,))
            if px + py + pz > 0:
                new = (1 - px - py - pz) * rho
                for code, p in zip((1, 2, 3), (px, py, pz)):
                    if p:
                        new = new + p * _conj_full(rho, _PAULI[code], (q,))
                rho = new
    probs = np.real(np.diag(rho)).copy()
    if noise is not None:
        probs = (1 - noise.global_depolarizing) * probs + noise.global_depolarizing / dim
        for q, r in enumerate(noise.readout_probs(n)):
            if r:
                bit = 1 << (n - 1 - q)
                probs = (1 - r) * probs + r * probs[np.arange(dim) ^ bit]
    return probs


def _conj_full(rho: np.ndarray, u: np.ndarray, qubits) -> np.ndarray:
    """``U rho U^dagger`` for a gate on ``qubits``."""
    # batch rows x become U x, so apply_matrix(A, U) = A U^T
    left = apply_matrix(rho.T, u, qubits).T
    return apply_matrix(left.conj(), u, qubits).conj()
