"""Gaussian-state covariance matrices and the Pfaffian overlap polynomial.

For a shadow sample ``(Q, b)`` and a Slater determinant ``phi`` the
coefficient of ``z^l`` in

    q(z) = i^(zeta/2) / 2^(n - zeta/2) pf[(C0 + z T^T Q^T C_b Q T)|_S]

with ``T = Q' W^dagger`` equals ``tr(U_Q^dagger |b><b| U_Q  Pi_2l(|phi><0|))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .borel import SignedPermutation
from .pfaffian import pfaffian

PFAFFIAN_CHUNK = 200_000


def covariance_basis(bits: np.ndarray) -> np.ndarray:
    """Covariance of computational basis states; ``bits`` has shape ``(..., n)``."""
    bits = np.asarray(bits)
    n = bits.shape[-1]
    s = 1 - 2 * bits.astype(float)
    out = np.zeros(bits.shape[:-1] + (2 * n, 2 * n))
    idx = np.arange(n)
    out[..., 2 * idx, 2 * idx + 1] = s
    out[..., 2 * idx + 1, 2 * idx] = -s
    return out


def complete_unitary(v: np.ndarray) -> np.ndarray:
    """``n x n`` unitary whose first ``zeta`` columns are ``v`` (assumed orthonormal)."""
    v = np.asarray(v, dtype=complex)
    n, zeta = v.shape
    if zeta == n:
        return v.copy()
    # the complement of span(v) is the range of I - V V^dagger
    u, _, _ = np.linalg.svd(np.eye(n, dtype=complex) - v @ v.conj().T)
    out = np.hstack([v, u[:, : n - zeta]])
    return out


def orbital_rotation_orthogonal(v: np.ndarray) -> np.ndarray:
    """``Q'`` of the Gaussian unitary with ``U a+_j U^dagger = sum_k V_kj a+_k``."""
    u = complete_unitary(v)
    n = u.shape[0]
    q = np.zeros((2 * n, 2 * n))
    q[0::2, 0::2] = u.real
    q[0::2, 1::2] = -u.imag
    q[1::2, 0::2] = u.imag
    q[1::2, 1::2] = u.real
    return q


@dataclass(frozen=True)
class OverlapKernel:
    n: int
    zeta: int
    w: np.ndarray
    c0: np.ndarray
    keep: np.ndarray

    @classmethod
    def build(cls, n: int, zeta: int) -> "OverlapKernel":
        if zeta % 2 or not 0 <= zeta <= n:
            raise ValueError(f"invalid particle number {zeta} for n={n}")
        w = np.eye(2 * n, dtype=complex)
        blk = np.array([[1, -1j], [1, 1j]]) / np.sqrt(2)
        for j in range(zeta):
            w[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = blk
        keep = np.array([mu for mu in range(2 * n) if not (mu % 2 == 0 and mu < 2 * zeta)])
        c0 = covariance_basis(np.zeros(n, dtype=int))
        return cls(n, zeta, w, c0, keep)

    @property
    def degree(self) -> int:
        return self.n - self.zeta // 2

    @property
    def norm(self) -> complex:
        return 1j ** (self.zeta // 2) / 2.0 ** (self.n - self.zeta // 2)

    def transform(self, v: np.ndarray) -> np.ndarray:
        """``T = Q' W^dagger`` restricted to the retained columns."""
        t = orbital_rotation_orthogonal(v) @ self.w.conj().T
        return t[:, self.keep]


def rotated_sample_covariances(perms: np.ndarray, signs: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """``Q^T C_b Q`` for signed permutations given as arrays of shape ``(B, 2n)``."""
    cb = covariance_basis(bits)
    rows = perms[:, :, None]
    cols = perms[:, None, :]
    b = np.arange(perms.shape[0])[:, None, None]
    return cb[b, rows, cols] * signs[:, :, None] * signs[:, None, :]


def polynomial_values(t: np.ndarray, cq: np.ndarray, kernel: OverlapKernel, z: np.ndarray) -> np.ndarray:
    """``q(z)`` for each sample covariance ``cq`` (B, 2n, 2n) and node ``z`` (K,)."""
    a = np.einsum("mi,bmn,nj->bij", t, cq, t)
    c0 = kernel.c0[np.ix_(kernel.keep, kernel.keep)]
    out = np.empty((cq.shape[0], z.size), dtype=complex)
    for k, zk in enumerate(z):
        mats = c0[None] + zk * a
        for s in range(0, mats.shape[0], PFAFFIAN_CHUNK):
            out[s : s + PFAFFIAN_CHUNK, k] = pfaffian(mats[s : s + PFAFFIAN_CHUNK], check=False)
    return kernel.norm * out


def overlap_coefficients_batch(
    v: np.ndarray, perms: np.ndarray, signs: np.ndarray, bits: np.ndarray, kernel: OverlapKernel
) -> np.ndarray:
    """Coefficients of ``z^l`` for ``l = 0..n`` (zero beyond the polynomial degree)."""
    t = kernel.transform(v)
    cq = rotated_sample_covariances(perms, signs, bits)
    k = kernel.degree + 1
    nodes = np.exp(2j * np.pi * np.arange(k) / k)
    vals = polynomial_values(t, cq, kernel, nodes)
    coeffs = np.fft.fft(vals, axis=1) / k
    out = np.zeros((perms.shape[0], kernel.n + 1), dtype=complex)
    out[:, :k] = coeffs
    return out


def overlap_at_one_batch(v, perms, signs, bits, kernel) -> np.ndarray:
    """``q(1)``, the sum of all coefficients, with a single Pfaffian per sample."""
    t = kernel.transform(v)
    cq = rotated_sample_covariances(perms, signs, bits)
    return polynomial_values(t, cq, kernel, np.ones(1))[:, 0]


def overlap_polynomial_coeffs(phi, q: SignedPermutation, b, kernel: OverlapKernel) -> np.ndarray:
    """Single-sample coefficients of ``q(z)``; ``phi`` is an ``n x zeta`` orbital matrix."""
    v = phi.v if hasattr(phi, "v") else np.asarray(phi)
    bits = np.array([int(c) for c in b]) if isinstance(b, str) else np.asarray(b)
    return overlap_coefficients_batch(v, q.perm[None], q.signs[None], bits[None], kernel)[0]
