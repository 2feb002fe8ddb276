"""Local energies and mixed one-body expectations from excitation overlaps.

A walker with orthonormal orbitals ``Q`` is completed to a unitary ``U``
whose first ``zeta`` columns are ``Q``.  In that rotated basis the walker is
the reference determinant ``Phi_0`` and

    <Psi_T|H|phi> = E_ref <Psi_T|phi> + sum_{rp} H_rp <Psi_T|phi_p^r>
                  + sum_{p<q, r<s} H_rs,pq <Psi_T|phi_pq^rs>

with Slater-Condon elements of the rotated Hamiltonian.  Excited
determinants replace occupied columns in place (``p -> r``, ``q -> s``).

All batched contractions use ``np.matmul`` so every walker is processed
independently of the batch it travels in.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


@dataclass(frozen=True)
class ExcitationSet:
    """Column selections for the reference, single and double excitations."""

    n: int
    zeta: int
    columns: np.ndarray  # (E, zeta) column indices into U
    singles: np.ndarray  # (S, 2) rows (r, p)
    doubles: np.ndarray  # (Dd, 4) rows (r, s, p, q)

    @classmethod
    def build(cls, n: int, zeta: int) -> "ExcitationSet":
        occ = list(range(zeta))
        virt = list(range(zeta, n))
        cols = [occ]
        singles = []
        for p in occ:
            for r in virt:
                c = occ.copy()
                c[p] = r
                cols.append(c)
                singles.append((r, p))
        doubles = []
        for p, q in combinations(occ, 2):
            for r, s in combinations(virt, 2):
                c = occ.copy()
                c[p] = r
                c[q] = s
                cols.append(c)
                doubles.append((r, s, p, q))
        return cls(
            n,
            zeta,
            np.array(cols, dtype=np.int64).reshape(-1, zeta),
            np.array(singles, dtype=np.int64).reshape(-1, 2),
            np.array(doubles, dtype=np.int64).reshape(-1, 4),
        )

    @property
    def n_singles(self) -> int:
        return self.singles.shape[0]


def complete_basis(q: np.ndarray) -> np.ndarray:
    """Unitaries ``(W, n, n)`` whose first ``zeta`` columns equal ``q`` (W, n, zeta)."""
    w, n, zeta = q.shape
    if zeta == n:
        return q.copy()
    aug = np.concatenate([q, np.broadcast_to(np.eye(n, dtype=complex), (w, n, n))], axis=2)
    full, r = np.linalg.qr(aug)
    full = np.array(full[:, :, :n])
    if zeta:
        d = np.diagonal(r, axis1=1, axis2=2)[:, :zeta]
        full[:, :, :zeta] = full[:, :, :zeta] * (d / np.abs(d))[:, None, :]
    return full


def orthonormalize(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched QR: returns ``(Q, det R)`` with ``V = Q R``."""
    q, r = np.linalg.qr(v)
    return q, np.prod(np.diagonal(r, axis1=1, axis2=2), axis=1)


def rotate_one_body(u: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``U^dagger h U`` for a stack of unitaries; ``h`` may carry leading axes."""
    ud = np.conj(np.swapaxes(u, -1, -2))
    if h.ndim == 2:
        return np.matmul(np.matmul(ud, h[None]), u)
    # h: (L, n, n) -> (W, L, n, n)
    return np.matmul(np.matmul(ud[:, None], h[None]), u[:, None])


def _contract_axis(t: np.ndarray, m: np.ndarray, axis: int) -> np.ndarray:
    """``t'[.., a, ..] = sum_x t[.., x, ..] m[w, x, a]`` on tensor axis ``axis`` (1-based after W)."""
    moved = np.moveaxis(t, axis, -1)
    shape = moved.shape
    out = np.matmul(moved.reshape(shape[0], -1, shape[-1]), m).reshape(shape)
    return np.moveaxis(out, -1, axis)


def rotate_two_body(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``V'_pqrs = sum conj(U_ip) conj(U_jq) U_kr U_ls V_ijkl`` for each walker."""
    w = u.shape[0]
    t = np.broadcast_to(v, (w,) + v.shape).astype(complex)
    uc = np.conj(u)
    t = _contract_axis(t, uc, 1)
    t = _contract_axis(t, uc, 2)
    t = _contract_axis(t, u, 3)
    return _contract_axis(t, u, 4)


def determinant_amplitudes(u: np.ndarray, occ_rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """``det U[S, cols]`` for every sector state ``S`` and column set: shape ``(W, E, D)``."""
    zeta = cols.shape[1]
    if zeta == 0:
        return np.ones((u.shape[0], cols.shape[0], occ_rows.shape[0]), dtype=complex)
    rows = u[:, occ_rows, :]  # (W, D, zeta, n)
    picked = rows[:, :, :, cols]  # (W, D, zeta, E, zeta)
    return np.linalg.det(np.moveaxis(picked, 3, 1))


def slater_condon(h0: float, hbar: np.ndarray, vbar: np.ndarray, exc: ExcitationSet):
    """Reference energy, single and double matrix elements ``<Phi_exc|H|Phi_0>``."""
    z = exc.zeta
    o = np.arange(z)
    e_ref = np.full(hbar.shape[0], h0, dtype=complex)
    if z:
        e_ref = e_ref + np.einsum("wii->w", hbar[:, :z, :z])
        voo = vbar[:, :z, :z, :z, :z]
        e_ref = e_ref + 0.5 * (np.einsum("wijij->w", voo) - np.einsum("wijji->w", voo))
    if exc.n_singles:
        r, p = exc.singles[:, 0], exc.singles[:, 1]
        coul = vbar[:, r[:, None], o[None, :], p[:, None], o[None, :]].sum(axis=2)
        exch = vbar[:, r[:, None], o[None, :], o[None, :], p[:, None]].sum(axis=2)
        singles = hbar[:, r, p] + coul - exch
    else:
        singles = np.zeros((hbar.shape[0], 0), dtype=complex)
    if exc.doubles.shape[0]:
        r, s, p, q = exc.doubles.T
        doubles = vbar[:, r, s, p, q] - vbar[:, r, s, q, p]
    else:
        doubles = np.zeros((hbar.shape[0], 0), dtype=complex)
    return e_ref, singles, doubles


def local_energy_from_overlaps(h0, h, v, u, overlaps, exc: ExcitationSet) -> np.ndarray:
    """``<Psi_T|H|phi>/<Psi_T|phi>`` from excitation overlaps ``(W, E)``."""
    hbar = rotate_one_body(u, h)
    vbar = rotate_two_body(u, v)
    e_ref, singles, doubles = slater_condon(h0, hbar, vbar, exc)
    ns = exc.n_singles
    num = e_ref * overlaps[:, 0]
    num = num + np.sum(singles * overlaps[:, 1 : 1 + ns], axis=1)
    num = num + np.sum(doubles * overlaps[:, 1 + ns :], axis=1)
    return num / overlaps[:, 0]


def mixed_one_body_from_overlaps(u, mats, overlaps, exc: ExcitationSet) -> np.ndarray:
    """``<Psi_T|L_g|phi>/<Psi_T|phi>`` for one-body matrices ``mats`` (L, n, n)."""
    if mats.shape[0] == 0:
        return np.zeros((u.shape[0], 0), dtype=complex)
    lbar = rotate_one_body(u, mats)  # (W, L, n, n)
    diag = np.einsum("wgkk->wg", lbar[:, :, :exc.zeta, :exc.zeta]) if exc.zeta else 0.0
    if exc.n_singles:
        r, p = exc.singles[:, 0], exc.singles[:, 1]
        ratios = overlaps[:, 1 : 1 + exc.n_singles] / overlaps[:, :1]
        diag = diag + np.sum(lbar[:, :, r, p] * ratios[:, None, :], axis=2)
    return diag
