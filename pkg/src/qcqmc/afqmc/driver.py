"""Walker ensembles, the imaginary-time loop and the energy trace.

Each walker draws its auxiliary fields from its own stream keyed by walker
id, so runs are identical regardless of how walkers are split between
workers.  Workers advance disjoint chunks of walkers through all steps; the
energy reduction over the full walker axis happens afterwards in a fixed
order.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import EnsembleCollapseError, PropagationDivergedError
from ..hamiltonian import CholeskyFactorization
from ..rng import stream_rng
from ..slater import SlaterDeterminant
from .backends import TrialBackend
from .energy import orthonormalize
from .propagation import (
    FieldSample,
    PropagatorContext,
    force_bias,
    free_projection_factor,
    phaseless_factor,
    propagate_orbitals,
)

MODES = ("phaseless", "free")


@dataclass
class AfqmcConfig:
    dt: float = 0.005
    n_steps: int = 200
    n_walkers: int = 100
    mode: str = "phaseless"
    e0: float | None = None
    max_fb: float = 1.0
    reorth_period: int = 1
    seed: int = 0
    overlap_floor: float = 1e-8
    n_workers: int = 1
    equil_fraction: float = 0.25

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.dt <= 0 or self.n_steps < 1 or self.n_walkers < 1 or self.n_workers < 1:
            raise ValueError("dt, n_steps, n_walkers and n_workers must be positive")
        if not 0 <= self.equil_fraction < 1:
            raise ValueError("equil_fraction must be in [0, 1)")


def blocking_stderr(x: np.ndarray, min_blocks: int = 8) -> float:
    """Standard error of a correlated series: the largest estimate over pairwise-blocking levels."""
    x = np.asarray(x, dtype=float)
    best = float("nan")
    while x.size >= min_blocks:
        err = float(x.std(ddof=1) / np.sqrt(x.size))
        best = err if np.isnan(best) else max(best, err)
        m = x.size // 2
        x = 0.5 * (x[: 2 * m : 2] + x[1 : 2 * m : 2])
    return best


@dataclass
class EnergyTrace:
    """Mixed energy estimate per step (steps ``0 .. n_steps``)."""

    dt: float
    energy: np.ndarray  # complex, (n_steps + 1,)
    total_weight: np.ndarray
    frozen_count: np.ndarray
    field_hash: str
    config: dict = field(default_factory=dict)

    @property
    def steps(self) -> np.ndarray:
        return np.arange(self.energy.size)

    @property
    def tau(self) -> np.ndarray:
        return self.steps * self.dt

    def summary(self, equil_fraction: float | None = None) -> dict:
        frac = self.config.get("equil_fraction", 0.25) if equil_fraction is None else equil_fraction
        start = int(np.floor(frac * self.energy.size))
        tail = self.energy[start:].real
        return {
            "energy_mean": float(tail.mean()),
            "energy_stderr": blocking_stderr(tail),
            "energy_stderr_naive": float(tail.std(ddof=1) / np.sqrt(tail.size)) if tail.size > 1 else float("nan"),
            "energy_final": float(self.energy[-1].real),
            "energy_final_imag": float(self.energy[-1].imag),
            "discarded_steps": start,
            "n_steps": int(self.energy.size - 1),
            "final_frozen": int(self.frozen_count[-1]),
            "field_hash": self.field_hash,
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "tau", "E_re", "E_im", "total_weight", "frozen_count"])
            for k in range(self.energy.size):
                w.writerow([k, repr(float(self.tau[k])), repr(float(self.energy[k].real)),
                            repr(float(self.energy[k].imag)), repr(float(self.total_weight[k])),
                            int(self.frozen_count[k])])

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"summary": self.summary(), "config": self.config}, fh, indent=2)


@dataclass
class _ChunkResult:
    ids: np.ndarray
    weight: np.ndarray  # (n_steps + 1, Wc) complex (phaseless: real)
    e_loc: np.ndarray  # (n_steps + 1, Wc)
    hashes: list


def _run_chunk(ids: np.ndarray, v0: np.ndarray, backend: TrialBackend, ctx: PropagatorContext,
               cfg: AfqmcConfig) -> _ChunkResult:
    wc = ids.size
    rngs = [stream_rng(cfg.seed, "fields", int(i)) for i in ids]
    hashers = [hashlib.sha256() for _ in ids]
    v = np.repeat(v0[None], wc, axis=0).astype(complex)
    weight = np.ones(wc, dtype=complex)
    active = np.ones(wc, dtype=bool)
    ref = np.abs(backend.overlap(v0[None]))[0]
    floor = cfg.overlap_floor * max(ref, 1e-300)
    n_l = ctx.chol.n_vectors
    w_hist = np.zeros((cfg.n_steps + 1, wc), dtype=complex)
    e_hist = np.zeros((cfg.n_steps + 1, wc), dtype=complex)

    for step in range(cfg.n_steps + 1):
        q, _ = orthonormalize(v)
        with np.errstate(all="ignore"):
            quant = backend.evaluate(q)
        e_loc = np.where(active, quant.local_energy, 0.0)
        if not np.all(np.isfinite(e_loc)):
            raise PropagationDivergedError(f"non-finite local energy at step {step}")
        w_hist[step] = np.where(active, weight, 0.0)
        e_hist[step] = e_loc
        if step == cfg.n_steps:
            break
        x = np.stack([r.standard_normal(n_l) for r in rngs]) if n_l else np.zeros((wc, 0))
        for h, row in zip(hashers, x):
            h.update(row.tobytes())
        mixed = np.where(active[:, None], quant.mixed_l, 0.0)
        fields = FieldSample(x, force_bias(mixed, ctx))
        v_new, phase = propagate_orbitals(v, fields, ctx)
        with np.errstate(all="ignore"):
            ov_old = backend.overlap(v)
            ov_new = backend.overlap(v_new)
            ratio = phase * ov_new / ov_old
        if cfg.mode == "phaseless":
            factor = phaseless_factor(e_loc, ratio, ctx)
        else:
            factor = free_projection_factor(ratio, fields, ctx)
        weight = np.where(active, weight * factor, 0.0)
        v = v_new
        if (step + 1) % ctx.reorth_period == 0:
            v, _ = orthonormalize(v)
        # walkers with a vanishing trial overlap are frozen at zero weight
        with np.errstate(all="ignore"):
            ov_norm = np.abs(backend.overlap(orthonormalize(v)[0]))
        dead = active & ((ov_norm < floor) | (weight == 0))
        active &= ~dead
        weight = np.where(active, weight, 0.0)
        if not np.all(np.isfinite(weight)):
            raise PropagationDivergedError(f"non-finite walker weight at step {step + 1}")
    return _ChunkResult(ids, w_hist, e_hist, [h.hexdigest() for h in hashers])


def _chunks(n_walkers: int, n_workers: int) -> list[np.ndarray]:
    return [c for c in np.array_split(np.arange(n_walkers), n_workers) if c.size]


def run_afqmc(
    chol: CholeskyFactorization,
    backend: TrialBackend,
    config: AfqmcConfig,
    e0: float | None = None,
    initial: SlaterDeterminant | None = None,
) -> EnergyTrace:
    """Propagate ``config.n_walkers`` walkers from ``initial`` (default HF) and trace the energy."""
    n, zeta = backend.n, backend.zeta
    v0 = (initial or SlaterDeterminant.hartree_fock(n, zeta)).v
    e0 = config.e0 if config.e0 is not None else e0
    if e0 is None:
        e0 = backend.trial_energy()
    ctx = PropagatorContext(config.dt, e0, chol, config.max_fb, config.reorth_period)
    chunks = _chunks(config.n_walkers, config.n_workers)
    if len(chunks) == 1:
        results = [_run_chunk(chunks[0], v0, backend, ctx, config)]
    else:
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            futures = [pool.submit(_run_chunk, c, v0, backend, ctx, config) for c in chunks]
            results = [f.result() for f in futures]
    weight = np.concatenate([r.weight for r in results], axis=1)
    e_loc = np.concatenate([r.e_loc for r in results], axis=1)
    hashes = [h for r in results for h in r.hashes]

    total = np.sum(weight, axis=1)
    if np.any(np.abs(total) == 0):
        raise EnsembleCollapseError("all walker weights vanished")
    energy = np.sum(weight * e_loc, axis=1) / total
    frozen = np.sum(weight == 0, axis=1)
    field_hash = hashlib.sha256("".join(hashes).encode()).hexdigest()
    cfg = asdict(config)
    cfg["e0"] = e0
    return EnergyTrace(config.dt, energy, np.abs(total), frozen, field_hash, cfg)
