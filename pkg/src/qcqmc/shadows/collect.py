"""Simulated collection of Matchgate shadow datasets."""

from __future__ import annotations

import hashlib

import numpy as np

from ..errors import EmptyDatasetError
from ..rng import STREAMS, stream_rng
from ..sim.circuit import Circuit
from ..sim.noise import PauliNoiseModel, outcomes_to_counts, sample_outcomes
from ..sim.statevector import apply_circuit, zero_state
from ..sim.trial import TrialSpec, preparation_circuit, validate_trial
from .borel import sample_signed_permutation
from .compile import compile_matchgate_circuit
from .records import ShadowDataset


def circuit_hash(c: Circuit) -> str:
    return hashlib.sha256(c.to_json().encode()).hexdigest()[:16]


def run_shadow_circuits(
    psi0: np.ndarray,
    prep: Circuit | None,
    n_circuits: int,
    shots: int,
    noise: PauliNoiseModel | None,
    seed: int,
    stream: str,
) -> ShadowDataset:
    """Measure ``U_Q prep |psi0>`` for ``n_circuits`` random ``Q``.

    Circuit ``i`` draws ``Q`` and its noise from generators keyed by
    ``(seed, stream, i)`` and ``(seed, "noise", stream id, i)``, so any prefix
    of a dataset is reproduced by a shorter run with the same seed.
    """
    if n_circuits < 1:
        raise EmptyDatasetError("at least one circuit is required")
    n = psi0.size.bit_length() - 1
    perms, signs, circ, bits, counts = [], [], [], [], []
    for i in range(n_circuits):
        q = sample_signed_permutation(n, stream_rng(seed, stream, i))
        uq = compile_matchgate_circuit(q)
        circuit = uq if prep is None else prep + uq
        out = sample_outcomes(psi0, shots, noise, circuit, stream_rng(seed, "noise", STREAMS[stream], i))
        perms.append(q.perm)
        signs.append(q.signs)
        for b, c in outcomes_to_counts(out, n).items():
            circ.append(i)
            bits.append([int(ch) for ch in b])
            counts.append(c)
    return ShadowDataset(
        n,
        np.array(perms),
        np.array(signs),
        np.array(circ, dtype=np.int64),
        np.array(bits, dtype=np.int64),
        np.array(counts, dtype=float),
    )


def collect_shadows(
    trial: TrialSpec,
    n_circuits: int,
    shots: int = 1024,
    noise: PauliNoiseModel | None = None,
    seed: int = 0,
) -> ShadowDataset:
    """Shadow dataset of ``(|0> + |Psi_T>)/sqrt(2)``.

    With ``noise.include_state_prep`` the preparation circuit runs on the
    noisy device; otherwise the ideal superposition state is handed to the
    noisy shadow circuit.
    """
    validate_trial(trial.circuit, trial.zeta)
    n = trial.n
    prep = preparation_circuit(trial.circuit, trial.zeta)
    if noise is not None and noise.include_state_prep:
        psi0, pre = zero_state(n), prep
    else:
        psi0, pre = apply_circuit(zero_state(n), prep), None
    ds = run_shadow_circuits(psi0, pre, n_circuits, shots, noise, seed, "collection")
    ds.meta = {
        "kind": "shadow",
        "n": n,
        "zeta": trial.zeta,
        "seed": seed,
        "shots": shots,
        "n_circuits": n_circuits,
        "trial": trial.circuit.to_dict(),
        "trial_label": trial.label,
        "trial_hash": circuit_hash(trial.circuit),
        "noise": None if noise is None else noise.to_dict(),
    }
    return ds
