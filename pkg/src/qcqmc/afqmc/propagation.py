"""Force bias, one-body propagators and weight updates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PropagationDivergedError
from ..hamiltonian import CholeskyFactorization

TAYLOR_TERMS = 18
TAYLOR_NORM = 0.5


@dataclass
class PropagatorContext:
    dt: float
    e0: float
    chol: CholeskyFactorization
    max_fb: float = 1.0
    reorth_period: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("time step must be positive")
        if self.reorth_period < 1:
            raise ValueError("reorth_period must be at least 1")


@dataclass
class FieldSample:
    x: np.ndarray  # (W, L)
    xbar: np.ndarray  # (W, L)


def expm_batch(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of each ``a[w]`` by scaling and squaring with a Taylor core.

    The squaring count is chosen per matrix and masked, so each result is
    independent of the rest of the batch.
    """
    norms = np.max(np.sum(np.abs(a), axis=1), axis=1)
    s = np.maximum(0, np.ceil(np.log2(np.maximum(norms, 1e-300) / TAYLOR_NORM))).astype(np.int64)
    scaled = a / (2.0 ** s)[:, None, None]
    n = a.shape[-1]
    eye = np.broadcast_to(np.eye(n, dtype=complex), a.shape)
    p = eye.copy()
    for k in range(TAYLOR_TERMS, 0, -1):
        p = eye + np.matmul(scaled, p) / k
    for i in range(int(s.max(initial=0))):
        sq = np.matmul(p, p)
        p = np.where((i < s)[:, None, None], sq, p)
    return p


def force_bias(mixed_l: np.ndarray, ctx: PropagatorContext) -> np.ndarray:
    """``xbar_g = -sqrt(dt) <v_g - <v_g>_MF>`` with ``v_g = i L_g``, capped in modulus."""
    m = ctx.chol.mean_field
    xbar = -np.sqrt(ctx.dt) * 1j * (mixed_l - m[None, :])
    mag = np.abs(xbar)
    scale = np.where(mag > ctx.max_fb, ctx.max_fb / np.maximum(mag, 1e-300), 1.0)
    return xbar * scale


def one_body_generator(fields: FieldSample, ctx: PropagatorContext) -> tuple[np.ndarray, np.ndarray]:
    """Exponent ``A`` (W, n, n) and the scalar mean-field phase of ``B(x - xbar)``."""
    chol = ctx.chol
    sdt = np.sqrt(ctx.dt)
    shift = fields.x - fields.xbar
    n = chol.v0.shape[0]
    a = np.broadcast_to(-ctx.dt * chol.v0, (shift.shape[0], n, n)).astype(complex)
    if chol.n_vectors:
        flat = chol.vectors.reshape(chol.n_vectors, n * n)
        a = a + 1j * sdt * np.matmul(shift, flat).reshape(-1, n, n)
        phase = np.exp(-1j * sdt * np.matmul(shift, chol.mean_field[:, None])[:, 0])
    else:
        phase = np.ones(shift.shape[0], dtype=complex)
    return a, phase


def propagate_orbitals(v: np.ndarray, fields: FieldSample, ctx: PropagatorContext):
    """``V' = exp(A) V`` and the scalar phase; raises on non-finite results."""
    a, phase = one_body_generator(fields, ctx)
    out = np.matmul(expm_batch(a), v)
    if not np.all(np.isfinite(out)):
        raise PropagationDivergedError("non-finite walker orbitals")
    return out, phase


def phaseless_factor(e_loc: np.ndarray, ratio: np.ndarray, ctx: PropagatorContext) -> np.ndarray:
    """``exp(-dt (Re E_loc - E0)) max(0, cos(arg ratio))``."""
    return np.exp(-ctx.dt * (e_loc.real - ctx.e0)) * np.maximum(0.0, np.cos(np.angle(ratio)))


def free_projection_factor(ratio, fields: FieldSample, ctx: PropagatorContext) -> np.ndarray:
    """``ratio exp(x.xbar - xbar.xbar/2) exp(-dt (H0' - E0))``."""
    x, xb = fields.x, fields.xbar
    expo = np.sum(x * xb - 0.5 * xb * xb, axis=1)
    return ratio * np.exp(expo) * np.exp(-ctx.dt * (ctx.chol.h0_shift - ctx.e0))
