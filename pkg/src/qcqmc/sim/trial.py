"""Trial-state circuits and the superposition-state preparation.

A trial circuit ``V_T`` must fix the vacuum and keep the ``zeta``-particle
sector invariant.  The device prepares ``(|0> + V_T|HF>)/sqrt(2)`` by
running a Hadamard plus CNOT fan-out (giving ``(|0..0> + |1..10..0>)/sqrt(2)``
with ``zeta`` leading ones) and then ``V_T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrialValidityError
from ..hamiltonian import sector_states
from .circuit import Circuit
from .statevector import apply_circuit, basis_state, zero_state

VALIDITY_TOL = 1e-10


def hf_bitstring(n: int, zeta: int) -> str:
    return "1" * zeta + "0" * (n - zeta)


def superposition_prefix(n: int, zeta: int, hadamard: bool = True) -> Circuit:
    """Hadamard on qubit 0 and a CNOT fan-out to qubits ``1 .. zeta-1``."""
    c = Circuit(n)
    if zeta == 0:
        return c
    if hadamard:
        c.append("H", (0,))
    for j in range(1, zeta):
        c.append("CNOT", (0, j))
    return c


def validate_trial(v_t: Circuit, zeta: int) -> None:
    """Raise unless ``v_t`` fixes ``|0>`` and preserves the ``zeta`` sector."""
    n = v_t.n_qubits
    out = apply_circuit(zero_state(n), v_t)
    if abs(abs(out[0]) - 1) > VALIDITY_TOL or abs(out[0] - 1) > VALIDITY_TOL:
        raise TrialValidityError("trial circuit does not fix the vacuum")
    states = sector_states(n, zeta)
    mask = np.zeros(1 << n, dtype=bool)
    mask[states] = True
    batch = np.zeros((states.size, 1 << n), dtype=complex)
    batch[np.arange(states.size), states] = 1.0
    images = apply_circuit(batch, v_t)
    leak = np.max(np.abs(images[:, ~mask]), initial=0.0)
    if leak > VALIDITY_TOL:
        raise TrialValidityError(f"trial circuit leaks {leak:.2e} out of the {zeta}-particle sector")


def trial_state(v_t: Circuit, zeta: int) -> np.ndarray:
    """``|Psi_T> = V_T |HF>``."""
    return apply_circuit(basis_state(hf_bitstring(v_t.n_qubits, zeta)), v_t)


def preparation_circuit(v_t: Circuit, zeta: int, hadamard: bool = True) -> Circuit:
    """Full device circuit from ``|0>``; ``hadamard=False`` gives the SP-compensated variant."""
    return superposition_prefix(v_t.n_qubits, zeta, hadamard) + v_t


def prepare_superposition_state(v_t: Circuit, zeta: int) -> np.ndarray:
    """Noiseless ``(|0> + |Psi_T>)/sqrt(2)``."""
    validate_trial(v_t, zeta)
    return apply_circuit(zero_state(v_t.n_qubits), preparation_circuit(v_t, zeta))


@dataclass(frozen=True)
class TrialSpec:
    """Named trial ansatz: a circuit ``V_T`` and its particle number."""

    circuit: Circuit
    zeta: int
    label: str = "custom"

    @property
    def n(self) -> int:
        return self.circuit.n_qubits

    def state(self) -> np.ndarray:
        return trial_state(self.circuit, self.zeta)


def double_excitation_trial(theta: float, n: int = 4, zeta: int = 2, qubits=(0, 1, 2, 3)) -> TrialSpec:
    """Single ``U_DE(theta)`` ansatz, used for the four-qubit H2 and NV-style models."""
    c = Circuit(n)
    c.append("UDE", qubits, (theta,))
    return TrialSpec(c, zeta, f"ude({theta:.6g})")


def identity_trial(n: int, zeta: int) -> TrialSpec:
    return TrialSpec(Circuit(n), zeta, "hf")
