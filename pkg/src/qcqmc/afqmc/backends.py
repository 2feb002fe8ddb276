"""Trial-overlap backends.

Every backend answers, for a batch of orthonormal walker orbitals ``q``
(shape ``(W, n, zeta)``): the overlap ``<Psi_T|phi>``, the local energy and
the mixed expectations ``<Psi_T|L_g|phi>/<Psi_T|phi>`` of the Cholesky
one-body operators.

``ExactBackend``
    dense dual vectors ``conj(Psi_T)``, ``conj(H Psi_T)`` and ``conj(L_g Psi_T)``
    on the particle sector; the oracle.
``TabulatedBackend``
    an amplitude table ``t_S ~ <Psi_T|S>`` over sector basis states combined
    with determinant minors and the rotated-Hamiltonian decomposition over
    reference, single and double excitations.
``ShadowBackend``
    a ``TabulatedBackend`` whose table is the Matchgate-shadow estimate of
    ``<Psi_T|S>`` from one shared dataset.  Shadow estimators are linear in
    ``phi``, so tabulation reproduces direct estimates exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ResourceError
from ..hamiltonian import (
    CholeskyFactorization,
    MolecularHamiltonian,
    jordan_wigner_map,
    sector_states,
)
from ..pauli import jw_annihilation
from ..shadows.channel import ChannelSpectrum
from ..shadows.estimate import basis_table, estimate_overlap
from ..shadows.records import ShadowDataset
from .energy import (
    ExcitationSet,
    complete_basis,
    determinant_amplitudes,
    local_energy_from_overlaps,
    mixed_one_body_from_overlaps,
)

EXACT_MAX_QUBITS = 12
TABULATED_MAX_QUBITS = 6


@dataclass
class WalkerQuantities:
    overlap: np.ndarray  # (W,)
    local_energy: np.ndarray  # (W,)
    mixed_l: np.ndarray  # (W, L)


def occupied_rows(states: np.ndarray, n: int) -> np.ndarray:
    return np.array([[j for j in range(n) if (s >> (n - 1 - j)) & 1] for s in states], dtype=np.int64)


def sector_amplitudes(v: np.ndarray, occ: np.ndarray) -> np.ndarray:
    """``det V[S, :]`` for each walker and sector state: ``(W, D)``."""
    if v.shape[2] == 0:
        return np.ones((v.shape[0], occ.shape[0]), dtype=complex)
    return np.linalg.det(v[:, occ, :])


class TrialBackend:
    variant = "abstract"

    def __init__(self, ham: MolecularHamiltonian, chol: CholeskyFactorization):
        self.ham = ham
        self.chol = chol
        self.n = ham.n_spin
        self.zeta = ham.n_electrons
        self.states = sector_states(self.n, self.zeta)
        self.occ = occupied_rows(self.states, self.n)

    def overlap(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, q: np.ndarray) -> WalkerQuantities:
        raise NotImplementedError

    def overlap_table_singles_doubles(self, q: np.ndarray) -> np.ndarray:
        """Overlaps of reference, single and double excitations ``(W, E)``."""
        exc = ExcitationSet.build(self.n, self.zeta)
        u = complete_basis(q)
        amps = determinant_amplitudes(u, self.occ, exc.columns)
        return np.matmul(amps, self.dual_table()[None, :, None])[..., 0]

    def dual_table(self) -> np.ndarray:
        raise NotImplementedError

    def trial_energy(self) -> float:
        """``<Psi_T|H|Psi_T> / <Psi_T|Psi_T>`` with ``Psi_T`` read from the dual table."""
        psi = np.conj(self.dual_table())
        hmat, _ = jordan_wigner_map(self.ham, verify_cap=0).sector_matrix(self.zeta)
        return float(np.real(np.vdot(psi, hmat @ psi) / np.vdot(psi, psi)))


class ExactBackend(TrialBackend):
    variant = "exact"

    def __init__(self, ham, chol, psi_t: np.ndarray):
        super().__init__(ham, chol)
        if self.n > EXACT_MAX_QUBITS:
            raise ResourceError(f"exact backend capped at {EXACT_MAX_QUBITS} qubits")
        psi_t = np.asarray(psi_t, dtype=complex)
        mask = np.ones(psi_t.size, dtype=bool)
        mask[self.states] = False
        if np.max(np.abs(psi_t[mask]), initial=0.0) > 1e-10:
            raise ValueError("trial state has weight outside the particle sector")
        qh = jordan_wigner_map(ham, verify_cap=0)
        hmat, _ = qh.sector_matrix(self.zeta)
        t = psi_t[self.states]
        self.psi_sector = t
        self.t = np.conj(t)
        self.t_h = np.conj(hmat @ t)
        a = [jw_annihilation(self.n, p).to_dense() for p in range(self.n)]
        sel = np.ix_(self.states, self.states)
        lmats = []
        for lvec in chol.vectors:
            dense = sum(lvec[i, k] * (a[i].conj().T @ a[k]) for i in range(self.n) for k in range(self.n)
                        if lvec[i, k] != 0)
            lmats.append(np.asarray(dense)[sel] if np.ndim(dense) else np.zeros((t.size, t.size)))
        self.t_l = np.array([np.conj(m @ t) for m in lmats]).reshape(len(lmats), t.size)

    def dual_table(self) -> np.ndarray:
        return self.t

    def overlap(self, v):
        return np.matmul(sector_amplitudes(v, self.occ), self.t[:, None])[:, 0]

    def evaluate(self, q):
        amps = sector_amplitudes(q, self.occ)
        ov = np.matmul(amps, self.t[:, None])[:, 0]
        num = np.matmul(amps, self.t_h[:, None])[:, 0]
        mixed = np.matmul(amps, self.t_l.T) / ov[:, None]
        return WalkerQuantities(ov, num / ov, mixed)


class TabulatedBackend(TrialBackend):
    variant = "tabulated"

    def __init__(self, ham, chol, table: np.ndarray, max_qubits: int = TABULATED_MAX_QUBITS):
        super().__init__(ham, chol)
        if self.n > max_qubits:
            raise ResourceError(f"tabulated backend capped at {max_qubits} qubits")
        self.t = np.asarray(table, dtype=complex)
        if self.t.shape != self.states.shape:
            raise ValueError("table size does not match the particle sector")
        self.exc = ExcitationSet.build(self.n, self.zeta)

    @classmethod
    def from_statevector(cls, ham, chol, psi_t, **kw) -> "TabulatedBackend":
        states = sector_states(ham.n_spin, ham.n_electrons)
        return cls(ham, chol, np.conj(np.asarray(psi_t)[states]), **kw)

    def dual_table(self) -> np.ndarray:
        return self.t

    def overlap(self, v):
        return np.matmul(sector_amplitudes(v, self.occ), self.t[:, None])[:, 0]

    def evaluate(self, q):
        u = complete_basis(q)
        amps = determinant_amplitudes(u, self.occ, self.exc.columns)  # (W, E, D)
        ovs = np.matmul(amps, self.t[None, :, None])[..., 0]
        eloc = local_energy_from_overlaps(self.ham.h0, self.ham.h, self.ham.v, u, ovs, self.exc)
        mixed = mixed_one_body_from_overlaps(u, self.chol.vectors, ovs, self.exc)
        return WalkerQuantities(ovs[:, 0], eloc, mixed)


class ShadowBackend(TabulatedBackend):
    variant = "shadow"

    def __init__(self, ham, chol, dataset: ShadowDataset, spectrum: ChannelSpectrum | None = None,
                 form: str = "full", **kw):
        spectrum = spectrum or ChannelSpectrum.noiseless(dataset.n)
        _, per_circuit = basis_table(dataset, ham.n_electrons, spectrum, form)
        table = per_circuit.mean(axis=0)
        super().__init__(ham, chol, table, **kw)
        self.dataset = dataset
        self.spectrum = spectrum
        self.form = form
        self.per_circuit = per_circuit

    def table_stderr(self) -> np.ndarray:
        pc = self.per_circuit
        err = np.sqrt(np.var(pc.real, axis=0, ddof=1) + np.var(pc.imag, axis=0, ddof=1))
        return err / np.sqrt(pc.shape[0])

    def direct_overlap(self, phi):
        """Pfaffian estimate on the full dataset without tabulation."""
        return estimate_overlap(self.dataset, phi, self.spectrum, self.zeta, form=self.form)
