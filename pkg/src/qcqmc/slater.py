"""Slater determinants as ``n x zeta`` orbital matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORTHO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SlaterDeterminant:
    """``coeff * a'+_1 ... a'+_zeta |0>`` with ``a'+_j = sum_k V[k, j] a+_k``.

    ``V`` is re-orthonormalized on construction; the determinant of the
    triangular factor is kept in ``coeff`` so the represented vector is
    unchanged.
    """

    v: np.ndarray
    coeff: complex = 1.0

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex)
        if v.ndim != 2 or v.shape[1] > v.shape[0]:
            raise ValueError("orbital matrix must be n x zeta with zeta <= n")
        coeff = complex(self.coeff)
        if v.shape[1] and np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))) > ORTHO_TOL:
            q, r = np.linalg.qr(v)
            coeff *= np.prod(np.diag(r))
            v = q
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "coeff", coeff)

    @property
    def n(self) -> int:
        return self.v.shape[0]

    @property
    def zeta(self) -> int:
        return self.v.shape[1]

    @classmethod
    def basis(cls, n: int, occupied) -> "SlaterDeterminant":
        occ = sorted(int(i) for i in occupied)
        return cls(np.eye(n, dtype=complex)[:, occ])

    @classmethod
    def hartree_fock(cls, n: int, zeta: int) -> "SlaterDeterminant":
        return cls.basis(n, range(zeta))

    @classmethod
    def random(cls, n: int, zeta: int, rng: np.random.Generator) -> "SlaterDeterminant":
        x = rng.normal(size=(n, zeta)) + 1j * rng.normal(size=(n, zeta))
        return cls(np.linalg.qr(x)[0])

    def statevector(self) -> np.ndarray:
        from .shadows.oracle import slater_statevector

        return self.coeff * slater_statevector(self.v)


def sector_amplitudes(v: np.ndarray, states: np.ndarray, n: int) -> np.ndarray:
    """``det V[S, :]`` for every sector basis index in ``states`` (batched minors)."""
    zeta = v.shape[1]
    if zeta == 0:
        return np.ones(states.size, dtype=complex)
    occ = np.array([[j for j in range(n) if (s >> (n - 1 - j)) & 1] for s in states])
    return np.linalg.det(v[occ, :])
