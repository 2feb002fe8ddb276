"""Overlap and ratio error studies, estimator scaling and the projector check."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DomainError, EmptyDatasetError, ResourceError, SectorError
from .hamiltonian import sector_states
from .rng import stream_rng
from .shadows.channel import ChannelSpectrum, b_coefficients
from .shadows.estimate import coefficient_table, estimates_from_coefficients
from .shadows.oracle import ORACLE_MAX_N, brute_force_projector_action, sector_projector
from .shadows.records import ShadowDataset
from .slater import SlaterDeterminant

STUDY_COLUMNS = ("n_circuits", "spectrum", "form", "amplitude_mae", "ratio_mae", "n_walkers", "n_ratios")


def random_walkers(n: int, zeta: int, count: int, seed: int = 0) -> list[SlaterDeterminant]:
    rng = stream_rng(seed, "study", 0)
    return [SlaterDeterminant.random(n, zeta, rng) for _ in range(count)]


def default_prefixes(n_total: int, start: int = 40, per_decade: int = 4) -> list[int]:
    if n_total < 1:
        raise EmptyDatasetError("dataset has no circuits")
    start = min(start, n_total)
    pts = np.unique(np.round(np.logspace(np.log10(start), np.log10(n_total),
                                         max(2, int(per_decade * np.log10(n_total / start)) + 1))).astype(int))
    return sorted(set(int(p) for p in pts) | {n_total})


def walker_amplitudes(walkers, states: np.ndarray, n: int, zeta: int) -> np.ndarray:
    """``det V[S, :]`` (times the walker coefficient) for each walker and sector state."""
    out = np.zeros((len(walkers), states.size), dtype=complex)
    for i, w in enumerate(walkers):
        if w.n != n or w.zeta != zeta:
            raise SectorError(f"walker {i} has n={w.n}, zeta={w.zeta}; expected n={n}, zeta={zeta}")
        for j, s in enumerate(states):
            occ = [k for k in range(n) if (s >> (n - 1 - k)) & 1]
            out[i, j] = w.coeff * (np.linalg.det(w.v[occ, :]) if zeta else 1.0)
    return out


def pairwise_ratios(values: np.ndarray) -> np.ndarray:
    """``x_i / x_j`` for all ``i < j`` along the last axis."""
    idx = np.array(list(combinations(range(values.shape[-1]), 2)))
    return values[..., idx[:, 0]] / values[..., idx[:, 1]]


@dataclass
class OverlapStudy:
    """MAE of amplitudes and pairwise ratios over circuit-count prefixes."""

    prefixes: list[int]
    exact: np.ndarray  # (M,)
    estimates: dict = field(default_factory=dict)  # (spectrum, form) -> (P, M)
    rows: list = field(default_factory=list)

    @property
    def n_ratios(self) -> int:
        m = self.exact.size
        return m * (m - 1) // 2

    def mae(self, spectrum: str, form: str, kind: str = "amplitude") -> np.ndarray:
        key = "amplitude_mae" if kind == "amplitude" else "ratio_mae"
        return np.array([r[key] for r in self.rows if r["spectrum"] == spectrum and r["form"] == form])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=STUDY_COLUMNS)
            w.writeheader()
            for r in self.rows:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def overlap_study(
    dataset: ShadowDataset,
    psi_t: np.ndarray,
    walkers: list[SlaterDeterminant],
    spectra: dict[str, ChannelSpectrum],
    zeta: int,
    prefixes: list[int] | None = None,
    forms=("factored",),
) -> OverlapStudy:
    """Compare shadow overlap estimates against exact ``<Psi_T|phi>`` for every walker.

    One coefficient table is built per dataset and contracted with each
    walker's sector amplitudes, so every prefix, spectrum and form shares the
    same Pfaffian evaluations.
    """
    if len(walkers) < 2:
        raise ValueError("a ratio study needs at least two walkers")
    n = dataset.n
    states, table = coefficient_table(dataset, zeta)  # (N, D, K)
    amps = walker_amplitudes(walkers, states, n, zeta)  # (M, D)
    exact = amps @ np.conj(np.asarray(psi_t)[states])
    prefixes = prefixes or default_prefixes(dataset.n_circuits)
    if max(prefixes) > dataset.n_circuits or min(prefixes) < 1:
        raise ValueError("prefix outside 1..n_circuits")
    cum = np.cumsum(table, axis=0)
    means = np.stack([cum[k - 1] / k for k in prefixes])  # (P, D, K)
    coeffs = np.einsum("md,pdk->pmk", amps, means)
    exact_ratios = pairwise_ratios(exact)
    study = OverlapStudy(list(prefixes), exact)
    for name, spec in spectra.items():
        for form in forms:
            est = estimates_from_coefficients(coeffs, spec, zeta, form)
            study.estimates[(name, form)] = est
            for k, row in zip(prefixes, est):
                study.rows.append({
                    "n_circuits": int(k),
                    "spectrum": name,
                    "form": form,
                    "amplitude_mae": float(np.mean(np.abs(row - exact))),
                    "ratio_mae": float(np.mean(np.abs(pairwise_ratios(row) - exact_ratios))),
                    "n_walkers": len(walkers),
                    "n_ratios": study.n_ratios,
                })
    return study


def stderr_scaling(
    dataset: ShadowDataset,
    walkers: list[SlaterDeterminant],
    spectrum: ChannelSpectrum,
    zeta: int,
    prefixes: list[int] | None = None,
    form: str = "full",
) -> tuple[np.ndarray, np.ndarray, float]:
    """Mean overlap-estimate stderr per prefix and the log-log slope of that curve."""
    states, table = coefficient_table(dataset, zeta)
    amps = walker_amplitudes(walkers, states, dataset.n, zeta)
    per = estimates_from_coefficients(np.einsum("md,ndk->nmk", amps, table), spectrum, zeta, form)  # (N, M)
    prefixes = np.array(prefixes or default_prefixes(dataset.n_circuits))
    errs = []
    for k in prefixes:
        p = per[:k]
        errs.append(np.mean(np.sqrt(np.var(p.real, axis=0, ddof=1) + np.var(p.imag, axis=0, ddof=1)) / np.sqrt(k)))
    errs = np.array(errs)
    slope = float(np.polyfit(np.log(prefixes), np.log(errs), 1)[0])
    return prefixes, errs, slope


@dataclass
class Theorem1Report:
    n: int
    zeta: int
    b_formula: np.ndarray
    b_oracle: np.ndarray
    max_error: float
    b_sum: float

    @property
    def passed(self) -> bool:
        return self.max_error <= 1e-10 and abs(self.b_sum - 1) <= 1e-12

    def lines(self) -> list[str]:
        out = [f"n={self.n} zeta={self.zeta}"]
        for l, (bf, bo) in enumerate(zip(self.b_formula, self.b_oracle)):
            out.append(f"  l={l}: b_formula={bf:.12g} b_oracle={bo:.12g}")
        out.append(f"  max entrywise error {self.max_error:.3e}; sum b = {self.b_sum:.15g}")
        out.append("  PASS" if self.passed else "  FAIL")
        return out


def verify_projector_identity(n: int, zeta: int, n_random: int = 20, seed: int = 0) -> Theorem1Report:
    """Check ``P Pi_2l(|phi><0|) P = b_2l |phi><0|`` for random sector states ``phi``.

    ``P`` projects onto ``|0>`` plus the ``zeta``-particle sector.  The
    oracle value of ``b_2l`` is read off the first random state.
    """
    if zeta % 2:
        raise DomainError(f"odd particle number {zeta}")
    if not 0 <= zeta <= n:
        raise DomainError(f"particle number {zeta} outside 0..{n}")
    if n > ORACLE_MAX_N:
        raise ResourceError(f"dense projector check capped at n={ORACLE_MAX_N}")
    rng = stream_rng(seed, "study", 1)
    states = sector_states(n, zeta)
    proj = sector_projector(n, zeta)
    b = b_coefficients(n, zeta)
    b_oracle = np.zeros(n + 1)
    err = 0.0
    for trial in range(n_random):
        phi = np.zeros(1 << n, dtype=complex)
        phi[states] = rng.normal(size=states.size) + 1j * rng.normal(size=states.size)
        phi /= np.linalg.norm(phi)
        target = np.outer(phi, np.eye(1 << n)[0])
        k = int(np.argmax(np.abs(phi)))
        for l in range(n + 1):
            got = proj @ brute_force_projector_action(phi, l) @ proj
            if trial == 0:
                b_oracle[l] = float(np.real(got[k, 0] / phi[k]))
            err = max(err, float(np.max(np.abs(got - b[l] * target))))
    return Theorem1Report(n, zeta, b, b_oracle, err, float(b.sum()))
