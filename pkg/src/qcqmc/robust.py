"""Calibration of the noisy Matchgate channel and robust overlap estimates.

The calibration state is ``|0>``.  For each shadow sample the analytic
weights ``alpha_2l(b, Q)`` are the coefficients of the zero-particle
overlap polynomial with ``phi = |0>``; their average is ``c_2l(1)`` and

    f~_2l = 2^n C(n, l)^-1 c_2l(1).

Only single-layer (``m = 1``) sequences are supported.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import IllConditionedCalibrationError
from .shadows.channel import ChannelSpectrum, channel_eigenvalues
from .shadows.collect import run_shadow_circuits
from .shadows.estimate import aggregate, circuit_means, robust_estimate_overlap  # noqa: F401
from .shadows.gaussian import OverlapKernel, overlap_coefficients_batch
from .shadows.records import ShadowDataset
from .sim.noise import PauliNoiseModel
from .sim.statevector import zero_state
from .sim.trial import TrialSpec, preparation_circuit, validate_trial

VARIANTS = ("bare-zero", "sp-compensated")


@dataclass
class CalibrationRecord:
    variant: str
    n: int
    c1: np.ndarray
    c1_stderr: np.ndarray
    f_tilde: np.ndarray
    stderr: np.ndarray
    n_circuits: int
    shots: int
    samples: ShadowDataset | None = None

    def spectrum(self) -> ChannelSpectrum:
        return ChannelSpectrum(self.n, self.f_tilde, calibrated=True, stderr=self.stderr)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "n": self.n,
            "f_tilde": [float(x) for x in self.f_tilde],
            "stderr": [float(x) for x in self.stderr],
            "n_circuits": int(self.n_circuits),
            "shots": int(self.shots),
        }

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationRecord":
        n = int(d["n"])
        f = np.array(d["f_tilde"], dtype=float)
        err = np.array(d.get("stderr", [0.0] * (n + 1)), dtype=float)
        scale = np.array([comb(n, l) for l in range(n + 1)]) / 2.0**n
        return cls(d["variant"], n, f * scale, err * scale, f, err, int(d["n_circuits"]), int(d["shots"]))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "CalibrationRecord":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def noisy_eigenvalues_from_c1(c1, n: int) -> np.ndarray:
    """``f~_2l = 2^n C(n, l)^-1 c_2l(1)``."""
    c1 = np.asarray(c1, dtype=float)
    if c1.shape != (n + 1,):
        raise ValueError(f"expected {n + 1} values of c_2l(1)")
    return np.array([2.0**n / comb(n, l) * c1[l] for l in range(n + 1)])


def calibration_weights(dataset: ShadowDataset) -> np.ndarray:
    """Per-circuit ``alpha_2l`` averaged over shots, shape ``(N, n + 1)``."""
    n = dataset.n
    kernel = OverlapKernel.build(n, 0)
    coeffs = overlap_coefficients_batch(
        np.zeros((n, 0), dtype=complex),
        dataset.perms[dataset.circuit],
        dataset.signs[dataset.circuit],
        dataset.bits,
        kernel,
    )
    return circuit_means(dataset, coeffs.real)


def calibrate_from_dataset(dataset: ShadowDataset, variant: str = "bare-zero") -> CalibrationRecord:
    dataset.require_nonempty()
    n = dataset.n
    alpha = calibration_weights(dataset)
    c1, c1_err = aggregate(alpha)
    c1, c1_err = np.real(c1), np.real(c1_err)
    f_tilde = noisy_eigenvalues_from_c1(c1, n)
    scale = np.array([2.0**n / comb(n, l) for l in range(n + 1)])
    shots = int(round(float(np.mean(dataset.shots))))
    return CalibrationRecord(variant, n, c1, c1_err, f_tilde, c1_err * scale, dataset.n_circuits, shots, dataset)


def run_calibration(
    n: int,
    n_circuits: int,
    shots: int = 1024,
    variant: str = "bare-zero",
    noise: PauliNoiseModel | None = None,
    seed: int = 0,
    trial: TrialSpec | None = None,
) -> CalibrationRecord:
    """Collect calibration shadows of ``|0>`` and derive ``f~``.

    ``sp-compensated`` runs the trial preparation without its initial
    Hadamard before each ``U_Q``; noiselessly this still prepares ``|0>``.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown calibration variant {variant!r}")
    prep = None
    if variant == "sp-compensated":
        if trial is None:
            raise ValueError("sp-compensated calibration needs a trial circuit")
        validate_trial(trial.circuit, trial.zeta)
        if trial.n != n:
            raise ValueError("trial circuit size does not match n")
        if noise is None or noise.include_state_prep:
            prep = preparation_circuit(trial.circuit, trial.zeta, hadamard=False)
    ds = run_shadow_circuits(zero_state(n), prep, n_circuits, shots, noise, seed, "calibration")
    ds.meta = {"kind": "calibration", "variant": variant, "seed": seed,
               "noise": None if noise is None else noise.to_dict()}
    return calibrate_from_dataset(ds, variant)


def check_spectrum(spectrum: ChannelSpectrum, zeta: int) -> None:
    """Raise if the calibrated spectrum cannot be inverted on the support of ``b``."""
    spectrum.inverse_weights(zeta)


def ratio_to_noiseless(record: CalibrationRecord) -> tuple[np.ndarray, np.ndarray]:
    f = channel_eigenvalues(record.n)
    return record.f_tilde / f, record.stderr / f


__all__ = [
    "CalibrationRecord",
    "IllConditionedCalibrationError",
    "VARIANTS",
    "calibrate_from_dataset",
    "check_spectrum",
    "noisy_eigenvalues_from_c1",
    "ratio_to_noiseless",
    "robust_estimate_overlap",
    "run_calibration",
]
