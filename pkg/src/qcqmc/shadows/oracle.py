"""Dense Majorana-basis oracles for small ``n``."""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from ..errors import ResourceError
from ..hamiltonian import sector_states
from ..pauli import majorana_product
from ..sim.statevector import apply_circuit
from .borel import SignedPermutation
from .compile import compile_matchgate_circuit

ORACLE_MAX_N = 4


@lru_cache(maxsize=None)
def majorana_strings(n: int, size: int) -> tuple[np.ndarray, ...]:
    """Dense ``gamma_S`` for every ordered subset ``S`` of ``[2n]`` with ``|S| = size``."""
    if n > ORACLE_MAX_N:
        raise ResourceError(f"dense Majorana enumeration capped at n={ORACLE_MAX_N}")
    return tuple(majorana_product(n, s).to_dense() for s in combinations(range(2 * n), size))


def brute_force_projector_action(phi: np.ndarray, l: int) -> np.ndarray:
    """``Pi_2l(|phi><0|) = 2^-n sum_{|S|=2l} <0|gamma_S^dagger|phi> gamma_S``."""
    phi = np.asarray(phi, dtype=complex)
    n = phi.size.bit_length() - 1
    out = np.zeros((phi.size, phi.size), dtype=complex)
    for g in majorana_strings(n, 2 * l):
        # <0|g^dagger|phi> = conj(<phi|g|0>) = conj(phi^dagger g[:, 0])
        out += np.conj(np.vdot(phi, g[:, 0])) * g
    return out / 2**n


def projector_apply(op: np.ndarray, l: int) -> np.ndarray:
    """``Pi_2l`` applied to an arbitrary dense operator."""
    n = op.shape[0].bit_length() - 1
    out = np.zeros_like(op, dtype=complex)
    for g in majorana_strings(n, 2 * l):
        out += np.trace(g.conj().T @ op) * g
    return out / 2**n


def sector_projector(n: int, zeta: int) -> np.ndarray:
    """Diagonal projector onto span of ``|0>`` and the weight-``zeta`` basis states."""
    p = np.zeros(1 << n)
    p[0] = 1.0
    p[sector_states(n, zeta)] = 1.0
    return np.diag(p)


def dense_channel_eigenvalue(n: int, l: int) -> float:
    """``tr(M_Z Pi_2l) / tr(Pi_2l)`` with ``M_Z`` the computational-basis dephasing."""
    strings = majorana_strings(n, 2 * l)
    total = 0.0
    for g in strings:
        diag = np.diag(np.diag(g))
        total += np.real(np.trace(g.conj().T @ diag)) / 2**n
    return total / len(strings)


def slater_statevector(v: np.ndarray) -> np.ndarray:
    """Amplitudes ``det V[S, :]`` on occupied sets ``S`` listed in ascending order."""
    v = np.asarray(v, dtype=complex)
    n, zeta = v.shape
    psi = np.zeros(1 << n, dtype=complex)
    for occ in combinations(range(n), zeta):
        idx = sum(1 << (n - 1 - j) for j in occ)
        psi[idx] = np.linalg.det(v[list(occ), :]) if zeta else 1.0
    return psi


def dense_sample_coefficient(phi: np.ndarray, q: SignedPermutation, b: int, l: int) -> complex:
    """``tr(U_Q^dagger |b><b| U_Q Pi_2l(|phi><0|))`` by dense matrices."""
    u_circ = compile_matchgate_circuit(q)
    dim = phi.size
    ket = np.zeros(dim, dtype=complex)
    ket[b] = 1.0
    # U^dagger|b> via the unitary
    u = u_circ.unitary()
    snap = u.conj().T @ ket
    op = brute_force_projector_action(phi, l)
    return complex(np.vdot(snap, op @ snap))


def exact_shadow_dataset(psi: np.ndarray, noise=None, max_n: int = 2):
    """Every ``Q`` in ``B(2n)`` with every outcome weighted by its exact probability.

    Averages over this dataset are exact expectations of the shadow
    estimators.  With ``noise`` the probabilities come from the dense
    density-matrix evolution of the same noise model.
    """
    from ..sim.noise import exact_outcome_distribution
    from .borel import enumerate_borel
    from .records import ShadowDataset

    psi = np.asarray(psi, dtype=complex)
    n = psi.size.bit_length() - 1
    if n > max_n:
        raise ResourceError(f"exhaustive Borel enumeration capped at n={max_n}")
    all_bits = np.array([[(b >> (n - 1 - j)) & 1 for j in range(n)] for b in range(1 << n)])
    perms, signs, circ, bits, weights = [], [], [], [], []
    for i, q in enumerate(enumerate_borel(n)):
        circ_q = compile_matchgate_circuit(q)
        if noise is None:
            p = np.abs(apply_circuit(psi, circ_q)) ** 2
        else:
            p = exact_outcome_distribution(psi, circ_q, noise)
        perms.append(q.perm)
        signs.append(q.signs)
        circ.extend([i] * p.size)
        bits.append(all_bits)
        weights.append(p)
    return ShadowDataset(n, np.array(perms), np.array(signs), np.array(circ, dtype=np.int64),
                         np.concatenate(bits), np.concatenate(weights), {"kind": "exact-enumeration"})
