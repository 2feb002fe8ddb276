import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcqmc.errors import TrialValidityError
from qcqmc.hamiltonian import sector_states
from qcqmc.sim.circuit import Circuit, Gate
from qcqmc.sim.noise import PauliNoiseModel, exact_outcome_distribution, sample_measurements, sample_outcomes
from qcqmc.sim.statevector import apply_circuit, basis_state, zero_state
from qcqmc.sim.trial import (
    double_excitation_trial,
    identity_trial,
    prepare_superposition_state,
    validate_trial,
)

ANGLE = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


@settings(max_examples=30, deadline=None)
@given(ANGLE, st.sampled_from(["XX", "XY", "YX", "YY"]))
def test_gates_unitary(theta, paulis):
    for g in (Gate("RZ", (0,), (theta,)), Gate("RY", (0,), (theta,)), Gate("MG", (0, 1), (theta,), paulis),
              Gate("UDE", (0, 1, 2, 3), (theta,))):
        u = g.matrix()
        assert np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < 1e-12


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("MG", (0, 2), (0.1,), "XX")
    with pytest.raises(ValueError):
        Circuit(2).append("H", (2,))
    with pytest.raises(ValueError):
        Gate("FOO", (0,))


def test_hadamard():
    psi = apply_circuit(zero_state(1), Circuit(1).append("H", (0,)))
    np.testing.assert_allclose(psi, [1 / np.sqrt(2)] * 2)


@pytest.mark.parametrize("theta", [0.3, -1.1, 2.0])
def test_double_excitation(theta):
    c = Circuit(4).append("UDE", (0, 1, 2, 3), (theta,))
    out = apply_circuit(basis_state("1100"), c)
    ref = np.cos(theta / 2) * basis_state("1100") - np.sin(theta / 2) * basis_state("0011")
    np.testing.assert_allclose(out, ref, atol=1e-15)
    np.testing.assert_allclose(apply_circuit(zero_state(4), c), zero_state(4))


def test_circuit_json_roundtrip():
    c = Circuit(3).append("H", (0,)).append("MG", (1, 2), (0.4,), "XY").append("RZ", (2,), (0.1,))
    c2 = Circuit.from_json(c.to_json())
    np.testing.assert_allclose(c.unitary(), c2.unitary())


def test_norm_preserved(rng):
    c = Circuit(3).append("H", (0,)).append("CNOT", (0, 2)).append("MG", (1, 2), (0.7,), "YY").append("RY", (1,), (0.2,))
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    assert abs(np.linalg.norm(apply_circuit(psi, c)) - 1) < 1e-12


def test_superposition_identity_trial():
    psi = prepare_superposition_state(identity_trial(4, 2).circuit, 2)
    np.testing.assert_allclose(psi, (basis_state("0000") + basis_state("1100")) / np.sqrt(2), atol=1e-15)


def test_superposition_h2_trial_sector():
    psi = prepare_superposition_state(double_excitation_trial(-0.150474).circuit, 2)
    assert abs(np.vdot(psi, psi) - 1) < 1e-12
    allowed = np.zeros(16, dtype=bool)
    allowed[0] = True
    allowed[sector_states(4, 2)] = True
    assert np.max(np.abs(psi[~allowed])) < 1e-15


def test_invalid_trial():
    with pytest.raises(TrialValidityError):
        validate_trial(Circuit(4).append("X", (0,)), 2)
    with pytest.raises(TrialValidityError):
        # fixes |0> but mixes Hamming weights 2 and 1
        validate_trial(Circuit(4).append("CNOT", (0, 1)), 2)


def test_noiseless_sampling():
    recs = sample_measurements(basis_state("01"), 5, rng=1)
    assert [(r.bitstring, r.multiplicity) for r in recs] == [("01", 5)]
    bell = (basis_state("00") + basis_state("11")) / np.sqrt(2)
    out = sample_outcomes(bell, 100_000, rng=2)
    frac = np.mean(out == 0)
    assert abs(frac - 0.5) < 5 * np.sqrt(0.25 / 1e5)


def test_sampling_deterministic():
    psi = prepare_superposition_state(double_excitation_trial(0.4).circuit, 2)
    noise = PauliNoiseModel(default=(0.01, 0.03, 0.02), readout=0.01)
    c = Circuit(4).append("MG", (1, 2), (0.3,), "XX")
    a = sample_outcomes(psi, 500, noise, c, rng=7)
    b = sample_outcomes(psi, 500, noise, c, rng=7)
    assert np.array_equal(a, b)


@pytest.mark.parametrize(
    "noise",
    [
        PauliNoiseModel(default=(0.05, 0.05, 0.05)),
        PauliNoiseModel(default=(0.02, 0.06, 0.04), readout=[0.01, 0.05, 0.0], global_depolarizing=0.1),
        PauliNoiseModel(per_gate={"MG": (0.1, 0.0, 0.05)}, coherent_rz=0.2),
    ],
)
def test_trajectories_match_density_matrix(noise):
    c = Circuit(3).append("H", (0,)).append("MG", (0, 1), (0.9,), "XY").append("CNOT", (1, 2)).append("RY", (2,), (0.5,))
    shots = 100_000
    out = sample_outcomes(zero_state(3), shots, noise, c, rng=11)
    freq = np.bincount(out, minlength=8) / shots
    p = exact_outcome_distribution(zero_state(3), c, noise)
    sigma = np.sqrt(p * (1 - p) / shots) + 1e-12
    assert np.all(np.abs(freq - p) <= 5 * sigma + 1e-4)


def test_noise_model_validation():
    with pytest.raises(ValueError):
        PauliNoiseModel(default=(0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        PauliNoiseModel(readout=1.5)
    d = PauliNoiseModel(default=(0.01, 0.03, 0.02), readout=0.02).to_dict()
    assert PauliNoiseModel.from_dict(d).to_dict() == d
