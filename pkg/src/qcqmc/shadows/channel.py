"""Matchgate measurement-channel spectrum and the ratio-resilience coefficients."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from ..errors import DomainError, IllConditionedCalibrationError

F_TILDE_FLOOR = 1e-3


def channel_eigenvalue(n: int, l: int) -> float:
    """``f_2l = C(2n, 2l)^-1 C(n, l)``."""
    if not 0 <= l <= n:
        raise DomainError(f"l={l} outside 0..{n}")
    return comb(n, l) / comb(2 * n, 2 * l)


def channel_eigenvalues(n: int) -> np.ndarray:
    return np.array([channel_eigenvalue(n, l) for l in range(n + 1)])


def b_coefficient(n: int, zeta: int, l: int) -> float:
    """``b_2l = 2^(zeta-n) C(n-zeta, l-zeta/2)`` on ``zeta/2 <= l <= n-zeta/2``, else 0."""
    if zeta % 2:
        raise DomainError(f"odd particle number {zeta}")
    if not 0 <= zeta <= n:
        raise DomainError(f"particle number {zeta} outside 0..{n}")
    if not zeta // 2 <= l <= n - zeta // 2:
        return 0.0
    return 2.0 ** (zeta - n) * comb(n - zeta, l - zeta // 2)


def b_coefficients(n: int, zeta: int) -> np.ndarray:
    return np.array([b_coefficient(n, zeta, l) for l in range(n + 1)])


@dataclass
class ChannelSpectrum:
    """Even-irrep eigenvalues ``f_2l`` (or calibrated ``f~_2l``) for ``l = 0..n``."""

    n: int
    f: np.ndarray
    calibrated: bool = False
    zeta: int | None = None
    stderr: np.ndarray | None = None
    b: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        if self.f.shape != (self.n + 1,):
            raise ValueError(f"spectrum needs {self.n + 1} entries")
        if not np.all(np.isfinite(self.f)):
            raise ValueError("spectrum entries must be finite")
        if self.zeta is not None and self.b is None:
            self.b = b_coefficients(self.n, self.zeta)

    @classmethod
    def noiseless(cls, n: int, zeta: int | None = None) -> "ChannelSpectrum":
        return cls(n, channel_eigenvalues(n), False, zeta)

    def with_zeta(self, zeta: int) -> "ChannelSpectrum":
        return ChannelSpectrum(self.n, self.f, self.calibrated, zeta, self.stderr)

    def inverse_weights(self, zeta: int) -> np.ndarray:
        """``1/f_2l`` on the support of ``b_2l`` and 0 elsewhere, with the conditioning guard."""
        b = b_coefficients(self.n, zeta)
        support = b != 0
        if np.any(np.abs(self.f[support]) < F_TILDE_FLOOR):
            bad = np.flatnonzero(support & (np.abs(self.f) < F_TILDE_FLOOR)).tolist()
            raise IllConditionedCalibrationError(
                f"|f_2l| < {F_TILDE_FLOOR} for l in {bad} where b_2l is nonzero"
            )
        out = np.zeros(self.n + 1)
        out[support] = 1.0 / self.f[support]
        return out

    def prefactor(self, zeta: int) -> float:
        """``sum_l f_2l b_2l``: the mean of ``q(1)`` is this times ``<0|rho|phi>``."""
        return float(np.dot(self.f, b_coefficients(self.n, zeta)))
