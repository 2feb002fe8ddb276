"""Overlap estimation from Matchgate shadow datasets.

Two estimator forms are provided.

``full``
    per-sample ``2 sum_l f_2l^-1 coeff_l``; unbiased for ``<Psi_T|phi>``.
``factored``
    ``2 q(1) / sum_l f_2l b_2l`` where ``q(1) = sum_l coeff_l``.  The
    numerator does not depend on the spectrum, so overlap ratios from raw
    and calibrated spectra coincide exactly.

Shots are averaged within a circuit first; standard errors come from the
spread of the per-circuit means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyDatasetError, IllConditionedCalibrationError
from ..hamiltonian import sector_states
from ..slater import SlaterDeterminant
from .channel import ChannelSpectrum, b_coefficients
from .gaussian import OverlapKernel, overlap_at_one_batch, overlap_coefficients_batch
from .records import ShadowDataset

FORMS = ("full", "factored")


@dataclass(frozen=True)
class OverlapEstimate:
    value: complex
    stderr: float
    n_circuits: int

    def __iter__(self):
        yield self.value
        yield self.stderr


def _orbitals(phi) -> tuple[np.ndarray, complex]:
    if isinstance(phi, SlaterDeterminant):
        return phi.v, phi.coeff
    return np.asarray(phi, dtype=complex), 1.0


def circuit_means(dataset: ShadowDataset, per_outcome: np.ndarray) -> np.ndarray:
    """Shot-weighted mean of a per-outcome quantity within each circuit (last axes kept)."""
    shots = dataset.shots
    w = dataset.counts / shots[dataset.circuit]
    flat = per_outcome.reshape(per_outcome.shape[0], -1) * w[:, None]
    out = np.zeros((dataset.n_circuits, flat.shape[1]), dtype=flat.dtype)
    np.add.at(out, dataset.circuit, flat)
    return out.reshape((dataset.n_circuits,) + per_outcome.shape[1:])


def _sample_arrays(dataset: ShadowDataset):
    return dataset.perms[dataset.circuit], dataset.signs[dataset.circuit], dataset.bits


def per_circuit_estimates(
    dataset: ShadowDataset,
    phi,
    spectrum: ChannelSpectrum,
    zeta: int,
    form: str = "full",
) -> np.ndarray:
    """Per-circuit estimates of ``<Psi_T|phi>`` (for ``factored``: before the prefactor)."""
    dataset.require_nonempty()
    v, coeff = _orbitals(phi)
    kernel = OverlapKernel.build(dataset.n, zeta)
    perms, signs, bits = _sample_arrays(dataset)
    if form == "full":
        weights = spectrum.inverse_weights(zeta)
        coeffs = overlap_coefficients_batch(v, perms, signs, bits, kernel)
        per = 2.0 * coeffs @ weights
    elif form == "factored":
        per = 2.0 * overlap_at_one_batch(v, perms, signs, bits, kernel)
    else:
        raise ValueError(f"unknown estimator form {form!r}")
    return coeff * circuit_means(dataset, per)


def aggregate(values: np.ndarray, estimator: str = "mean", k: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Mean (or median of means over ``k`` contiguous batches) and stderr along axis 0."""
    n = values.shape[0]
    if n == 0:
        raise EmptyDatasetError("nothing to aggregate")
    if estimator == "mean":
        val = values.mean(axis=0)
    elif estimator == "median-of-means":
        batches = np.array_split(values, min(k, n), axis=0)
        means = np.array([b.mean(axis=0) for b in batches])
        val = np.median(means.real, axis=0) + 1j * np.median(means.imag, axis=0)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    if n > 1:
        err = np.sqrt(np.var(values.real, axis=0, ddof=1) + np.var(values.imag, axis=0, ddof=1)) / np.sqrt(n)
    else:
        err = np.full(np.shape(val), np.inf)
    return val, err


def factored_prefactor(spectrum: ChannelSpectrum, zeta: int) -> float:
    pre = spectrum.prefactor(zeta)
    if abs(pre) < 1e-3 * np.sum(b_coefficients(spectrum.n, zeta)):
        raise IllConditionedCalibrationError(f"factored prefactor {pre:.3e} too small")
    return pre


def estimate_overlap(
    dataset: ShadowDataset,
    phi,
    spectrum: ChannelSpectrum,
    zeta: int | None = None,
    estimator: str = "mean",
    k: int = 10,
    form: str = "full",
) -> OverlapEstimate:
    """Shadow estimate of ``<Psi_T|phi>`` with its standard error."""
    if spectrum.n != dataset.n:
        raise ValueError("spectrum and dataset disagree on n")
    v, _ = _orbitals(phi)
    zeta = v.shape[1] if zeta is None else zeta
    per = per_circuit_estimates(dataset, phi, spectrum, zeta, form)
    val, err = aggregate(per, estimator, k)
    if form == "factored":
        pre = factored_prefactor(spectrum, zeta)
        val, err = val / pre, err / abs(pre)
    return OverlapEstimate(complex(val), float(err), dataset.n_circuits)


def robust_estimate_overlap(dataset, phi, spectrum: ChannelSpectrum, **kw) -> OverlapEstimate:
    """``estimate_overlap`` with a calibrated spectrum ``f~``."""
    if not spectrum.calibrated:
        raise ValueError("robust estimation needs a calibrated spectrum")
    return estimate_overlap(dataset, phi, spectrum, **kw)


def coefficient_table(dataset: ShadowDataset, zeta: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-circuit mean overlap-polynomial coefficients for every weight-``zeta`` basis state.

    Returns ``(states, table)`` with ``table`` of shape ``(N, D, n + 1)``.
    Coefficients are linear in ``phi``, so contracting the ``D`` axis with
    determinant amplitudes gives the coefficients of any ``zeta``-particle
    Slater determinant.
    """
    dataset.require_nonempty()
    n = dataset.n
    states = sector_states(n, zeta)
    kernel = OverlapKernel.build(n, zeta)
    perms, signs, bits = _sample_arrays(dataset)
    cols = []
    for s in states:
        occ = [j for j in range(n) if (s >> (n - 1 - j)) & 1]
        v = SlaterDeterminant.basis(n, occ).v
        cols.append(circuit_means(dataset, overlap_coefficients_batch(v, perms, signs, bits, kernel)))
    return states, np.stack(cols, axis=1)


def estimates_from_coefficients(coeffs: np.ndarray, spectrum: ChannelSpectrum, zeta: int,
                                form: str = "full") -> np.ndarray:
    """Overlap estimates from coefficient arrays ``(..., n + 1)``; prefactor included."""
    if form == "full":
        return 2.0 * coeffs @ spectrum.inverse_weights(zeta)
    if form == "factored":
        return 2.0 * coeffs.sum(axis=-1) / factored_prefactor(spectrum, zeta)
    raise ValueError(f"unknown estimator form {form!r}")


def basis_table(
    dataset: ShadowDataset,
    zeta: int,
    spectrum: ChannelSpectrum,
    form: str = "full",
) -> tuple[np.ndarray, np.ndarray]:
    """Per-circuit estimates of ``<Psi_T|S>`` for every weight-``zeta`` basis state ``S``.

    Returns ``(states, table)`` with ``table`` of shape ``(N, D)``.  The
    estimators are linear in ``phi``, so ``table @ amplitudes(phi)``
    reproduces ``per_circuit_estimates`` exactly.  For ``factored`` the
    prefactor is already divided out.
    """
    states, coeffs = coefficient_table(dataset, zeta)
    return states, estimates_from_coefficients(coeffs, spectrum, zeta, form)
