"""Batched Pfaffian by Parlett-Reid skew-symmetric tridiagonalization with pivoting."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError

ANTISYMMETRY_TOL = 1e-10


def pfaffian(a: np.ndarray, check: bool = True) -> np.ndarray | complex:
    """Pfaffian of an antisymmetric ``2m x 2m`` matrix or a stack of them.

    The input is antisymmetrized by averaging; ``check`` rejects inputs whose
    symmetric part exceeds ``1e-10`` in max norm.
    """
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DomainError("Pfaffian needs square matrices")
    dim = a.shape[-1]
    if dim % 2:
        raise DomainError("Pfaffian of an odd-dimensional matrix")
    sym = a + np.swapaxes(a, -1, -2)
    if check and sym.size and np.max(np.abs(sym)) > ANTISYMMETRY_TOL:
        raise DomainError("matrix is not antisymmetric")
    batch_shape = a.shape[:-2]
    work = (0.5 * (a - np.swapaxes(a, -1, -2))).astype(complex).reshape(-1, dim, dim)
    nb = work.shape[0]
    pf = np.ones(nb, dtype=complex)
    rows = np.arange(nb)
    for k in range(0, dim - 1, 2):
        kp = k + 1 + np.argmax(np.abs(work[:, k + 1 :, k]), axis=1)
        moved = kp != k + 1
        if np.any(moved):
            b = rows[moved]
            p = kp[moved]
            tmp = work[b, k + 1, :].copy()
            work[b, k + 1, :] = work[b, p, :]
            work[b, p, :] = tmp
            tmp = work[b, :, k + 1].copy()
            work[b, :, k + 1] = work[b, :, p]
            work[b, :, p] = tmp
            pf[moved] *= -1
        piv = work[:, k, k + 1]
        pf *= piv
        if k + 2 < dim:
            safe = np.where(piv == 0, 1.0, piv)
            tau = work[:, k, k + 2 :] / safe[:, None]
            tau[piv == 0] = 0.0
            col = work[:, k + 2 :, k + 1]
            work[:, k + 2 :, k + 2 :] += tau[:, :, None] * col[:, None, :] - col[:, :, None] * tau[:, None, :]
    pf = pf.reshape(batch_shape)
    return pf[()] if pf.ndim == 0 else pf
