import numpy as np
import pytest
import scipy.linalg

from qcqmc.afqmc.backends import ExactBackend, ShadowBackend, TabulatedBackend
from qcqmc.afqmc.driver import AfqmcConfig, run_afqmc
from qcqmc.afqmc.energy import orthonormalize
from qcqmc.afqmc.propagation import (
    FieldSample,
    PropagatorContext,
    expm_batch,
    force_bias,
    free_projection_factor,
    phaseless_factor,
    propagate_orbitals,
)
from qcqmc.afqmc.walker import Walker, propagate_walker, update_weight_phaseless, walker_local_energy
from qcqmc.config import fixture_trials
from qcqmc.errors import EnsembleCollapseError, ResourceError
from qcqmc.hamiltonian import (
    cholesky_decompose,
    exact_ground_state,
    fixture_path,
    from_spatial_integrals,
    jordan_wigner_map,
    load_fcidump,
)
from qcqmc.pauli import jw_annihilation
from qcqmc.shadows.collect import collect_shadows
from qcqmc.shadows.oracle import slater_statevector
from qcqmc.sim.trial import double_excitation_trial
from qcqmc.slater import SlaterDeterminant

H2_THETA = fixture_trials()["h2_sto3g_0.75"]["theta"]


@pytest.fixture(scope="module")
def h2_trial_state():
    return double_excitation_trial(H2_THETA).state()


@pytest.fixture(scope="module")
def exact_backend(h2, h2_chol, h2_trial_state):
    return ExactBackend(h2, h2_chol, h2_trial_state)


def random_orbitals(n, zeta, count, seed):
    rng = np.random.default_rng(seed)
    return np.stack([SlaterDeterminant.random(n, zeta, rng).v for _ in range(count)])


def test_expm_matches_scipy(rng):
    a = rng.normal(size=(6, 4, 4)) + 1j * rng.normal(size=(6, 4, 4))
    a *= np.array([1e-3, 0.1, 1.0, 3.0, 10.0, 0.0])[:, None, None]
    out = expm_batch(a)
    for k in range(a.shape[0]):
        ref = scipy.linalg.expm(a[k])
        assert np.allclose(out[k], ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


def test_expm_batch_independent(rng):
    a = rng.normal(size=(3, 4, 4)) * np.array([0.01, 1.0, 20.0])[:, None, None]
    full = expm_batch(a)
    for k in range(3):
        assert np.array_equal(full[k], expm_batch(a[k : k + 1])[0])


def test_one_body_evolution_matches_dense(rng):
    n, zeta = 4, 2
    a = 0.3 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    ops = [jw_annihilation(n, p).to_dense() for p in range(n)]
    gen = sum(a[i, j] * ops[i].conj().T @ ops[j] for i in range(n) for j in range(n))
    v = SlaterDeterminant.random(n, zeta, rng).v
    dense = scipy.linalg.expm(gen) @ slater_statevector(v)
    det = slater_statevector(expm_batch(a[None])[0] @ v)
    assert np.allclose(det, dense, atol=1e-8)


def test_zero_shift_propagates_one_body_only(h2_chol, rng):
    ctx = PropagatorContext(0.01, 0.0, h2_chol)
    v = random_orbitals(4, 2, 3, 0)
    x = rng.normal(size=(3, h2_chol.n_vectors))
    out, phase = propagate_orbitals(v, FieldSample(x, x), ctx)
    ref = scipy.linalg.expm(-0.01 * h2_chol.v0) @ v
    assert np.allclose(out, ref, atol=1e-13)
    assert np.allclose(phase, 1.0)


def test_phaseless_factor_cases(h2_chol):
    ctx = PropagatorContext(0.1, -1.0, h2_chol)
    e = np.array([-1.0, -1.0, -1.0, -0.5])
    ratio = np.array([1.0, 1j, -1.0, 2.0])
    f = phaseless_factor(e, ratio, ctx)
    assert f[0] == pytest.approx(1.0)
    assert f[1] == pytest.approx(0.0, abs=1e-15)
    assert f[2] == 0.0
    assert f[3] == pytest.approx(np.exp(-0.05))


def test_free_projection_zero_fields(h2_chol):
    ctx = PropagatorContext(0.1, h2_chol.h0_shift, h2_chol)
    z = np.zeros((2, h2_chol.n_vectors))
    f = free_projection_factor(np.array([1.0, 0.5j]), FieldSample(z, z), ctx)
    assert np.allclose(f, [1.0, 0.5j])


def test_force_bias_cap(h2_chol):
    ctx = PropagatorContext(0.01, 0.0, h2_chol, max_fb=0.5)
    m = h2_chol.mean_field
    mixed = np.stack([m + 1e-3, m + 1e3 * (1 + 2j)])
    xb = force_bias(mixed, ctx)
    assert np.allclose(xb[0], -0.1j * 1e-3)
    assert np.allclose(np.abs(xb[1]), 0.5)
    assert np.allclose(np.angle(xb[1]), np.angle(-1j * (1 + 2j)))


def test_constant_hamiltonian_local_energy():
    ham = from_spatial_integrals(1.3, np.zeros((2, 2)), np.zeros((2, 2, 2, 2)), 2)
    chol = cholesky_decompose(ham)
    assert chol.n_vectors == 0
    psi = double_excitation_trial(0.4).state()
    q = orthonormalize(random_orbitals(4, 2, 5, 1))[0]
    for backend in (ExactBackend(ham, chol, psi), TabulatedBackend.from_statevector(ham, chol, psi)):
        assert np.allclose(backend.evaluate(q).local_energy, 1.3, atol=1e-12)


def test_exact_and_tabulated_agree(h2, h2_chol, exact_backend, h2_trial_state):
    tab = TabulatedBackend.from_statevector(h2, h2_chol, h2_trial_state)
    q = orthonormalize(random_orbitals(4, 2, 8, 2))[0]
    a, b = exact_backend.evaluate(q), tab.evaluate(q)
    assert np.allclose(a.overlap, b.overlap, atol=1e-12)
    assert np.allclose(a.local_energy, b.local_energy, atol=1e-10)
    assert np.allclose(a.mixed_l, b.mixed_l, atol=1e-10)


def test_local_energy_of_exact_eigenstate(h2, h2_chol, h2_fci):
    backend = ExactBackend(h2, h2_chol, h2_fci.full_vector())
    q = orthonormalize(random_orbitals(4, 2, 4, 3))[0]
    assert np.allclose(backend.evaluate(q).local_energy, h2_fci.energy, atol=1e-10)


def test_tabulated_cap(h2, h2_chol, h2_trial_state):
    with pytest.raises(ResourceError):
        TabulatedBackend.from_statevector(h2, h2_chol, h2_trial_state, max_qubits=2)


def test_shadow_backend_consistent(h2, h2_chol, h2_trial_state):
    ds = collect_shadows(double_excitation_trial(H2_THETA), 400, 128, seed=5)
    sb = ShadowBackend(h2, h2_chol, ds)
    exact = np.conj(h2_trial_state[sb.states])
    assert np.all(np.abs(sb.t - exact) <= 5 * sb.table_stderr() + 1e-12)
    # tabulation reproduces a direct Pfaffian estimate exactly
    phi = SlaterDeterminant.random(4, 2, np.random.default_rng(4))
    assert abs(sb.overlap(phi.v[None])[0] - sb.direct_overlap(phi).value) < 1e-10


def test_walker_api_matches_batched(h2_chol, exact_backend):
    ctx = PropagatorContext(0.01, -1.0, h2_chol)
    w = Walker.from_determinant(SlaterDeterminant.hartree_fock(4, 2), exact_backend)
    rng = np.random.default_rng(0)
    for _ in range(3):
        x = rng.normal(size=h2_chol.n_vectors)
        f = FieldSample(x[None], np.zeros((1, h2_chol.n_vectors)))
        e = walker_local_energy(w, exact_backend)
        v_ref, phase = propagate_orbitals(w.v[None], f, ctx)
        ratio_ref = phase[0] * exact_backend.overlap(v_ref)[0] / exact_backend.overlap(w.v[None])[0]
        w, ratio = propagate_walker(w, FieldSample(x, np.zeros(h2_chol.n_vectors)), ctx, exact_backend)
        assert ratio == pytest.approx(ratio_ref, rel=1e-10)
        w = update_weight_phaseless(w, e, ratio, ctx)
    assert w.steps == 3 and w.weight > 0


def quick(**kw):
    base = dict(dt=0.01, n_steps=40, n_walkers=8, seed=3)
    base.update(kw)
    return AfqmcConfig(**base)


def test_worker_count_invariance(h2_chol, exact_backend):
    a = run_afqmc(h2_chol, exact_backend, quick(n_workers=1))
    b = run_afqmc(h2_chol, exact_backend, quick(n_workers=4))
    assert np.array_equal(a.energy, b.energy)
    assert a.field_hash == b.field_hash


def test_reorthonormalization_invariance(h2_chol, exact_backend):
    a = run_afqmc(h2_chol, exact_backend, quick(reorth_period=1))
    b = run_afqmc(h2_chol, exact_backend, quick(reorth_period=7))
    assert np.allclose(a.energy, b.energy, atol=1e-10)


def test_seed_changes_fields(h2_chol, exact_backend):
    a = run_afqmc(h2_chol, exact_backend, quick(n_steps=3))
    b = run_afqmc(h2_chol, exact_backend, quick(n_steps=3, seed=4))
    assert a.field_hash != b.field_hash


def test_collapse_raises(h2_chol, exact_backend):
    with pytest.raises(EnsembleCollapseError):
        run_afqmc(h2_chol, exact_backend, quick(overlap_floor=10.0))


def test_trace_outputs(tmp_path, h2_chol, exact_backend):
    tr = run_afqmc(h2_chol, exact_backend, quick(n_steps=4))
    tr.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "step,tau,E_re,E_im,total_weight,frozen_count"
    assert len(lines) == 6
    s = tr.summary()
    assert s["discarded_steps"] == 1 and s["n_steps"] == 4


def test_config_validation():
    with pytest.raises(ValueError):
        AfqmcConfig(mode="nope")
    with pytest.raises(ValueError):
        AfqmcConfig(dt=0)


def exact_projection_curve(ham, psi_t, taus):
    fci = exact_ground_state(jordan_wigner_map(ham), ham.n_electrons)
    hmat, states = jordan_wigner_map(ham).sector_matrix(ham.n_electrons)
    hmat = hmat.toarray()
    phi0 = SlaterDeterminant.hartree_fock(ham.n_spin, ham.n_electrons).statevector()[states]
    t = psi_t[states]
    out = []
    for tau in taus:
        prop = scipy.linalg.expm(-tau * hmat) @ phi0
        out.append((np.vdot(t, hmat @ prop) / np.vdot(t, prop)).real)
    return np.array(out), fci.energy


def test_free_projection_tracks_exact_curve(h2, h2_chol, exact_backend, h2_trial_state):
    cfg = AfqmcConfig(dt=0.01, n_steps=60, n_walkers=400, mode="free", seed=11, n_workers=4)
    tr = run_afqmc(h2_chol, exact_backend, cfg)
    ref, _ = exact_projection_curve(h2, h2_trial_state, tr.tau)
    # free projection is unbiased at every tau; allow a loose statistical margin
    assert np.max(np.abs(tr.energy.real - ref)) < 5e-3
    assert tr.energy[0].real == pytest.approx(ref[0], abs=1e-10)


@pytest.mark.slow
def test_h2_phaseless_near_fci(h2_chol, exact_backend, h2_fci):
    cfg = AfqmcConfig(dt=0.005, n_steps=1000, n_walkers=400, seed=1, n_workers=4, equil_fraction=0.5)
    s = run_afqmc(h2_chol, exact_backend, cfg).summary()
    assert abs(s["energy_mean"] - h2_fci.energy) < 3e-3


@pytest.mark.slow
def test_nv_model_large_step():
    ham = load_fcidump(fixture_path("nv_model_4q.fcidump"))
    chol = cholesky_decompose(ham)
    fci = exact_ground_state(jordan_wigner_map(ham), 2)
    psi = double_excitation_trial(fixture_trials()["nv_model_4q"]["theta"]).state()
    backend = ExactBackend(ham, chol, psi)
    cfg = AfqmcConfig(dt=0.4, n_steps=600, n_walkers=200, seed=2, n_workers=4, equil_fraction=0.5)
    s = run_afqmc(chol, backend, cfg).summary()
    # phaseless bias from the approximate trial is a few mHa on this model
    assert abs(s["energy_mean"] - fci.energy) < 1e-2


def test_trial_energy_default_shift(h2, h2_chol, h2_fci, exact_backend, h2_trial_state):
    dense = jordan_wigner_map(h2).to_dense()
    ref = np.vdot(h2_trial_state, dense @ h2_trial_state).real
    assert exact_backend.trial_energy() == pytest.approx(ref, abs=1e-12)
    tab = TabulatedBackend.from_statevector(h2, h2_chol, h2_trial_state)
    assert tab.trial_energy() == pytest.approx(ref, abs=1e-12)
    assert ExactBackend(h2, h2_chol, h2_fci.full_vector()).trial_energy() == pytest.approx(h2_fci.energy, abs=1e-10)
    tr = run_afqmc(h2_chol, exact_backend, quick(n_steps=2))
    assert tr.config["e0"] == pytest.approx(ref, abs=1e-12)


def test_blocking_stderr():
    from qcqmc.afqmc.driver import blocking_stderr

    rng = np.random.default_rng(0)
    white = rng.normal(size=4096)
    assert blocking_stderr(white) == pytest.approx(1 / 64, rel=0.25)
    # AR(1) with rho = 0.9: true stderr is sqrt((1 + rho) / (1 - rho)) times the naive one
    ar = np.zeros(4096)
    for k in range(1, ar.size):
        ar[k] = 0.9 * ar[k - 1] + rng.normal()
    naive = ar.std(ddof=1) / 64
    assert blocking_stderr(ar) > 3 * naive
    assert np.isnan(blocking_stderr(np.ones(3)))
