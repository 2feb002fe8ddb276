import json
import subprocess
import sys

import numpy as np
import pytest

from qcqmc.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_RESOURCE, main
from qcqmc.hamiltonian import write_fcidump

H2_TRIAL = '{"type": "fixture", "name": "h2_sto3g_0.75"}'


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def shadows(tmp_path_factory):
    out = tmp_path_factory.mktemp("shadows")
    assert run("shadows-collect", "--trial", H2_TRIAL, "--n-circuits", 60, "--shots", 64, "--out", out) == EXIT_OK
    return out


def test_shadows_collect_outputs(shadows):
    lines = (shadows / "shadows.jsonl").read_text().splitlines()
    assert len(lines) == 60
    meta = json.loads((shadows / "shadows.meta.json").read_text())
    assert meta["n_circuits"] == 60 and meta["zeta"] == 2
    resolved = json.loads((shadows / "resolved_config.json").read_text())
    assert resolved["command"] == "shadows-collect" and resolved["config"]["shots"] == 64
    assert resolved["version"]


def test_rerun_from_resolved_config_is_bitwise(shadows, tmp_path):
    assert run("shadows-collect", "--config", shadows / "resolved_config.json", "--out", tmp_path) == EXIT_OK
    assert (tmp_path / "shadows.jsonl").read_bytes() == (shadows / "shadows.jsonl").read_bytes()


def test_resolved_config_command_mismatch(shadows, tmp_path):
    assert run("calibrate", "--config", shadows / "resolved_config.json", "--out", tmp_path) == EXIT_CONFIG


def test_calibrate_outputs(tmp_path):
    assert run("calibrate", "--n", 4, "--n-circuits", 20, "--shots", 32, "--out", tmp_path) == EXIT_OK
    rec = json.loads((tmp_path / "calibration.json").read_text())
    assert len(rec["f_tilde"]) == 5 and rec["f_tilde"][0] == pytest.approx(1.0)
    assert (tmp_path / "calibration.csv").read_text().startswith("l,f_tilde,stderr")
    assert (tmp_path / "calibration.png").stat().st_size > 0


def test_overlap_study_outputs(shadows, tmp_path):
    assert run("calibrate", "--n", 4, "--n-circuits", 20, "--shots", 32, "--out", tmp_path / "cal") == EXIT_OK
    assert run("overlap-study", "--shadows", shadows / "shadows.jsonl", "--calibration",
               tmp_path / "cal" / "calibration.json", "--out", tmp_path / "study") == EXIT_OK
    text = (tmp_path / "study" / "overlap_study.csv").read_text()
    assert text.splitlines()[0].startswith("n_circuits,spectrum,form")
    assert "robust" in text and "raw" in text
    assert (tmp_path / "study" / "overlap_study.png").exists()


def test_afqmc_run_paired(shadows, tmp_path):
    args = ["afqmc-run", "--hamiltonian", "h2_sto3g_0.75", "--trial", H2_TRIAL, "--backend", "shadow",
            "--shadows", shadows / "shadows.jsonl", "--paired-shadows", shadows / "shadows.jsonl",
            "--n-steps", 10, "--n-walkers", 4, "--out", tmp_path]
    assert run(*args) == EXIT_OK
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["fields_synchronized"] is True
    assert summary["paired_difference"] == 0.0
    for name in ("trace.csv", "trace_paired.csv", "run_summary.json", "run_summary_paired.json", "trace.png"):
        assert (tmp_path / name).exists()
    header = (tmp_path / "trace.csv").read_text().splitlines()[0]
    assert header == "step,tau,E_re,E_im,total_weight,frozen_count"


def test_afqmc_run_reproducible(tmp_path):
    args = ["afqmc-run", "--hamiltonian", "h2_sto3g_0.75", "--trial", H2_TRIAL, "--n-steps", 8,
            "--n-walkers", 4, "--no-plot"]
    assert run(*args, "--out", tmp_path / "a") == EXIT_OK
    assert run(*args, "--out", tmp_path / "b") == EXIT_OK
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()


def test_fci_and_theorem1(tmp_path, capsys):
    assert run("fci", "--hamiltonian", "h2_sto3g_0.75", "--out", tmp_path) == EXIT_OK
    assert json.loads((tmp_path / "fci.json").read_text())["energy"] == pytest.approx(-1.13711707, abs=1e-7)
    assert run("verify-theorem1", "--n", 3, "--zeta", 2, "--n-random", 2, "--out", tmp_path) == EXIT_OK
    assert "PASS" in capsys.readouterr().out


def test_exit_codes(tmp_path):
    assert run("verify-theorem1", "--n", 4, "--zeta", 3) == EXIT_CONFIG
    assert run("verify-theorem1", "--n", 6, "--zeta", 2) == EXIT_RESOURCE
    assert run("shadows-collect", "--trial", H2_TRIAL, "--n-circuits", 0, "--out", tmp_path) == EXIT_CONFIG
    assert run("fci", "--hamiltonian", tmp_path / "missing.fcidump") == EXIT_CONFIG
    assert run("afqmc-run", "--hamiltonian", "h2_sto3g_0.75", "--dt", -1.0, "--out", tmp_path) == EXIT_CONFIG
    bad_cfg = tmp_path / "bad.yaml"
    bad_cfg.write_text("n: 4\nzeta: 2\nbogus: 1\n")
    assert run("verify-theorem1", "--config", bad_cfg) == EXIT_CONFIG


def test_not_psd_exit_code(tmp_path):
    g = np.zeros((2, 2, 2, 2))
    g[0, 0, 0, 0] = -1.0
    path = tmp_path / "neg.fcidump"
    write_fcidump(path, 0.0, np.eye(2), g, 2)
    assert run("afqmc-run", "--hamiltonian", path, "--n-steps", 2, "--out", tmp_path / "o") == EXIT_NUMERIC


def test_yaml_config_and_flag_override(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("hamiltonian: h2_sto3g_0.75\nn_levels: 2\n")
    assert run("fci", "--config", cfg, "--n-levels", 1, "--out", tmp_path) == EXIT_OK
    resolved = json.loads((tmp_path / "resolved_config.json").read_text())
    assert resolved["config"]["n_levels"] == 1


def test_version_flag():
    res = subprocess.run([sys.executable, "-m", "qcqmc.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("qcqmc 0.1.0")
