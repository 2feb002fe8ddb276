"""Batched statevector evolution.

States are arrays of shape ``(2**n,)`` or ``(B, 2**n)``; a batch axis lets
many noise trajectories share each gate application.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, Gate

NORM_TOL = 1e-12


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    return psi


def basis_state(bits: str) -> np.ndarray:
    psi = np.zeros(1 << len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def _n_qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def apply_matrix(psi: np.ndarray, u: np.ndarray, qubits) -> np.ndarray:
    """Apply a ``2**k`` square matrix to the listed qubits (first is most significant)."""
    single = psi.ndim == 1
    batch = psi[None] if single else psi
    n = _n_qubits(batch.shape[1])
    k = len(qubits)
    t = batch.reshape((batch.shape[0],) + (2,) * n)
    axes = [1 + q for q in qubits]
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    out = out.reshape(batch.shape)
    return out[0] if single else out


def apply_gate(psi: np.ndarray, g: Gate) -> np.ndarray:
    return apply_matrix(psi, g.matrix(), g.qubits)


def apply_circuit(psi: np.ndarray, c: Circuit) -> np.ndarray:
    """Exact unitary action of ``c``; raises if the dimension does not match."""
    if psi.shape[-1] != 1 << c.n_qubits:
        raise ValueError("state dimension does not match circuit")
    for g in c.gates:
        psi = apply_gate(psi, g)
    return psi


def apply_pauli_codes(psi: np.ndarray, qubit: int, codes: np.ndarray) -> np.ndarray:
    """Per-trajectory Pauli on one qubit; ``codes`` holds 0=I, 1=X, 2=Y, 3=Z per batch row."""
    n = _n_qubits(psi.shape[1])
    t = psi.reshape((psi.shape[0],) + (2,) * n).copy()
    ax = 1 + qubit
    zmask = (codes == 2) | (codes == 3)
    if np.any(zmask):
        idx = [slice(None)] * t.ndim
        idx[0] = zmask
        sub = t[tuple(idx)]
        sel = [slice(None)] * sub.ndim
        sel[ax] = 1
        sub[tuple(sel)] *= -1
        t[tuple(idx)] = sub
    xmask = (codes == 1) | (codes == 2)
    if np.any(xmask):
        t[xmask] = np.flip(t[xmask], axis=ax)
    ymask = codes == 2
    if np.any(ymask):
        # Y = i X Z
        t[ymask] *= 1j
    return t.reshape(psi.shape)


def probabilities(psi: np.ndarray) -> np.ndarray:
    p = np.abs(psi) ** 2
    return p / p.sum(axis=-1, keepdims=True)
