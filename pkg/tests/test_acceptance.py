"""Acceptance criteria 1-10; each test records one PASS/FAIL line."""

from itertools import combinations
from math import comb

import numpy as np
import pytest
from scipy.stats import ortho_group

from conftest import ACCEPTANCE_LINES
from qcqmc.afqmc.backends import ExactBackend, ShadowBackend
from qcqmc.afqmc.driver import AfqmcConfig, run_afqmc
from qcqmc.config import fixture_trials
from qcqmc.experiments import overlap_study, pairwise_ratios, random_walkers, stderr_scaling, verify_projector_identity
from qcqmc.pauli import majorana
from qcqmc.robust import ratio_to_noiseless, run_calibration
from qcqmc.shadows.borel import enumerate_borel, sample_signed_permutation
from qcqmc.shadows.channel import ChannelSpectrum, channel_eigenvalues
from qcqmc.shadows.collect import collect_shadows
from qcqmc.shadows.compile import compile_matchgate_circuit
from qcqmc.shadows.estimate import estimate_overlap
from qcqmc.shadows.oracle import dense_channel_eigenvalue, exact_shadow_dataset
from qcqmc.shadows.pfaffian import pfaffian
from qcqmc.sim.noise import PauliNoiseModel
from qcqmc.sim.statevector import zero_state
from qcqmc.sim.trial import double_excitation_trial
from qcqmc.slater import SlaterDeterminant

H2_THETA = fixture_trials()["h2_sto3g_0.75"]["theta"]
ASYMMETRIC_NOISE = PauliNoiseModel(default=(0.01, 0.02, 0.03))  # X, Y, Z = 1, 2, 3 %


def record(k: int, name: str, ok: bool, detail: str) -> None:
    line = f"criterion {k:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


# ---------------------------------------------------------------- shared data

@pytest.fixture(scope="module")
def h2_shadows_noiseless():
    return collect_shadows(double_excitation_trial(H2_THETA), 16_000, 1024, None, seed=91)


@pytest.fixture(scope="module")
def h2_shadows_noisy():
    return collect_shadows(double_excitation_trial(H2_THETA), 16_000, 1024, ASYMMETRIC_NOISE, seed=92)


# ---------------------------------------------------------------- criteria

def test_criterion_01_projector_identity():
    worst, sums = 0.0, 0.0
    for n in (2, 3, 4):
        for zeta in range(0, n + 1, 2):
            rep = verify_projector_identity(n, zeta, n_random=10, seed=n)
            worst = max(worst, rep.max_error)
            sums = max(sums, abs(rep.b_sum - 1))
    record(1, "projector identity", worst <= 1e-10 and sums <= 1e-12,
           f"max entrywise error {worst:.2e}, max |sum b - 1| {sums:.2e}")


def test_criterion_02_channel_spectrum():
    err = 0.0
    for n in (1, 2, 3):
        f = channel_eigenvalues(n)
        ref = [comb(n, l) / comb(2 * n, 2 * l) for l in range(n + 1)]
        dense = [dense_channel_eigenvalue(n, l) for l in range(n + 1)]
        err = max(err, np.max(np.abs(f - dense)), np.max(np.abs(f - ref)))
    record(2, "channel spectrum", err <= 1e-12, f"max |formula - dense trace| {err:.2e}")


def test_criterion_03_exact_unbiasedness():
    rng = np.random.default_rng(3)
    n_borel = sum(1 for _ in enumerate_borel(2))
    worst = 0.0
    for _ in range(20):
        psi = np.zeros(4, dtype=complex)
        psi[3] = np.exp(1j * rng.uniform(0, 2 * np.pi))
        ds = exact_shadow_dataset((zero_state(2) + psi) / np.sqrt(2))
        phi = SlaterDeterminant.random(2, 2, rng)
        exact = np.vdot(psi, phi.statevector())
        for form in ("full", "factored"):
            est = estimate_overlap(ds, phi, ChannelSpectrum.noiseless(2), form=form).value
            worst = max(worst, abs(est - exact))
    record(3, "exact unbiasedness n=2", n_borel == 384 and worst <= 1e-10,
           f"{n_borel} Borel elements, max |estimate - exact| {worst:.2e} over 20 pairs")


def test_criterion_04_pfaffian():
    rng = np.random.default_rng(4)
    worst_sq, worst_cov = 0.0, 0.0
    for i in range(200):
        m = 2 * (i % 8 + 1)
        a = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        a = a - a.T
        b = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        pf = pfaffian(a)
        det = np.linalg.det(a)
        worst_sq = max(worst_sq, abs(pf**2 - det) / abs(det))
        lhs = pfaffian(b @ a @ b.T)
        rhs = np.linalg.det(b) * pf
        worst_cov = max(worst_cov, abs(lhs - rhs) / abs(rhs))
    record(4, "Pfaffian kernel", worst_sq <= 1e-9 and worst_cov <= 1e-9,
           f"max rel pf^2 vs det {worst_sq:.2e}, max rel pf(BAB^T) vs det(B)pf(A) {worst_cov:.2e}")


def test_criterion_05_compilation_contract():
    n = 3
    rng = np.random.default_rng(5)
    gam = [majorana(n, mu).to_dense() for mu in range(2 * n)]
    worst = 0.0
    for i in range(50):
        # half Borel elements, half Haar orthogonal matrices of either determinant
        q = sample_signed_permutation(n, rng).matrix() if i % 2 == 0 else ortho_group.rvs(2 * n, random_state=i)
        u = compile_matchgate_circuit(q).unitary()
        for mu in range(2 * n):
            rhs = sum(q[nu, mu] * gam[nu] for nu in range(2 * n))
            worst = max(worst, np.max(np.abs(u @ gam[mu] @ u.conj().T - rhs)))
    record(5, "Matchgate compilation", worst <= 1e-10, f"max conjugation error {worst:.2e} over 50 Q at n=3")


@pytest.mark.slow
def test_criterion_06_robust_calibration():
    n, circuits, shots = 4, 4000, 1024
    parts, ok = [], True
    for p in (0.05, 0.2):
        rec = run_calibration(n, circuits, shots, noise=PauliNoiseModel(global_depolarizing=p), seed=60)
        ratio, err = ratio_to_noiseless(rec)
        z = np.abs(ratio[1:n] - (1 - p)) / err[1:n]
        ok &= bool(np.all(z <= 5))
        parts.append(f"p={p}: ratios {np.round(ratio[1:n], 4).tolist()} max z {z.max():.2f}")
    rec = run_calibration(n, circuits, shots, noise=ASYMMETRIC_NOISE, seed=61)
    ratio, err = ratio_to_noiseless(rec)
    r, e = ratio[1:n], err[1:n]
    i, j = int(np.argmax(r)), int(np.argmin(r))
    spread_z = (r[i] - r[j]) / np.hypot(e[i], e[j])
    ok &= bool(spread_z > 5)
    rel_spread = (r[i] - r[j]) / r.mean()
    parts.append(f"asymmetric Pauli: ratios {np.round(r, 4).tolist()} spread {rel_spread:.1%} at {spread_z:.1f} sigma")
    record(6, "robust calibration", ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_07_ratio_resilience():
    trial = double_excitation_trial(H2_THETA)
    ds = collect_shadows(trial, 10_000, 1024, ASYMMETRIC_NOISE, seed=70)
    cal = run_calibration(4, 10_000, 1024, noise=ASYMMETRIC_NOISE, seed=71)
    walkers = random_walkers(4, 2, 16, seed=72)
    spectra = {"raw": ChannelSpectrum.noiseless(4), "robust": cal.spectrum()}
    study = overlap_study(ds, trial.state(), walkers, spectra, 2, prefixes=[2000, 10_000])
    raw, rob = study.estimates[("raw", "factored")], study.estimates[("robust", "factored")]
    ra, rb = pairwise_ratios(raw), pairwise_ratios(rob)
    ident = float(np.max(np.abs(ra - rb) / np.abs(ra)))
    ratio_mae = study.mae("raw", "factored", "ratio")[-1]
    amp_raw = study.mae("raw", "factored")[-1]
    amp_rob = study.mae("robust", "factored")[-1]
    ok_a = ident <= 1e-12
    ok_b = ratio_mae * 3 <= amp_rob and ratio_mae * 3 <= amp_raw
    ok_c = amp_rob < amp_raw
    record(7, "ratio noise resilience", ok_a and ok_b and ok_c,
           f"(a) max rel raw/robust ratio diff {ident:.1e}; (b) ratio MAE {ratio_mae:.4f} vs amplitude MAE "
           f"raw {amp_raw:.4f} robust {amp_rob:.4f}; (c) robust < raw: {ok_c}")


@pytest.mark.slow
def test_criterion_08_afqmc_h2(h2, h2_chol, h2_fci):
    backend = ExactBackend(h2, h2_chol, double_excitation_trial(H2_THETA).state())
    cfg = AfqmcConfig(dt=0.005, n_steps=1000, n_walkers=400, seed=8, n_workers=4, equil_fraction=0.75)
    s = run_afqmc(h2_chol, backend, cfg).summary()
    bias = s["energy_mean"] - h2_fci.energy
    record(8, "AFQMC H2 exact backend", abs(bias) <= 2e-3,
           f"final-quarter mean {s['energy_mean']:.6f} Ha, FCI {h2_fci.energy:.6f} Ha, bias {bias * 1e3:+.3f} "
           f"+- {s['energy_stderr'] * 1e3:.3f} mHa (blocked)")


@pytest.mark.slow
def test_criterion_09_paired_noise_robustness(h2, h2_chol, h2_shadows_noiseless, h2_shadows_noisy):
    cfg = AfqmcConfig(dt=0.005, n_steps=1000, n_walkers=200, seed=9, n_workers=4, equil_fraction=0.5)
    traces = {}
    for label, ds in (("noiseless", h2_shadows_noiseless), ("noisy", h2_shadows_noisy)):
        backend = ShadowBackend(h2, h2_chol, ds, form="factored")
        traces[label] = run_afqmc(h2_chol, backend, cfg)
    same_fields = traces["noiseless"].field_hash == traces["noisy"].field_hash
    e = {k: tr.summary()["energy_mean"] for k, tr in traces.items()}
    diff = e["noisy"] - e["noiseless"]
    record(9, "paired noisy/noiseless QC-AFQMC", same_fields and abs(diff) <= 2e-3,
           f"noiseless {e['noiseless']:.6f} Ha, noisy {e['noisy']:.6f} Ha, difference {diff * 1e3:+.3f} mHa, "
           f"fields synchronized: {same_fields}")


@pytest.mark.slow
def test_criterion_10_stderr_scaling(h2_shadows_noiseless):
    ds = h2_shadows_noiseless.prefix(10_000)
    walkers = random_walkers(4, 2, 16, seed=10)
    prefixes = [40, 100, 250, 630, 1600, 4000, 10_000]
    _, errs, slope = stderr_scaling(ds, walkers, ChannelSpectrum.noiseless(4), 2, prefixes)
    record(10, "estimator scaling", abs(slope + 0.5) <= 0.1,
           f"log-log slope {slope:.3f} over {prefixes[0]}..{prefixes[-1]} circuits")
