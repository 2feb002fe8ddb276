"""Command-line entry point: ``qcqmc <subcommand> [--config FILE] [flags]``.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure
(ill-conditioned calibration, diverged or collapsed propagation), 4 resource
cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import (
    load_config_file,
    resolve_hamiltonian,
    resolve_noise,
    resolve_trial,
    validate,
    version_string,
    write_resolved,
)
from .errors import ConfigError, NotPSDError, ParseError, QcqmcError, ResourceError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_RESOURCE = 0, 2, 3, 4

DEFAULTS = {
    "shadows-collect": {"shots": 1024, "seed": 0, "noise": None, "out": "shadows_out"},
    "calibrate": {"shots": 1024, "seed": 0, "variant": "bare-zero", "noise": None, "out": "calibration_out"},
    "overlap-study": {"calibration": None, "n_walkers": 16, "walker_seed": 0, "forms": ["factored", "full"],
                      "plot": True, "out": "overlap_out"},
    "afqmc-run": {"trial": {"type": "hf"}, "backend": "exact", "shadows": None, "paired_shadows": None,
                  "calibration": None, "form": "full", "dt": 0.005, "n_steps": 1000, "n_walkers": 400,
                  "mode": "phaseless", "n_workers": 1, "max_fb": 1.0, "reorth_period": 1,
                  "equil_fraction": 0.25, "e0": None, "seed": 0, "plot": True, "out": "afqmc_out"},
    "fci": {"n_levels": 3, "out": None},
    "verify-theorem1": {"n_random": 20, "seed": 0, "out": None},
}


# ---------------------------------------------------------------- commands

def cmd_shadows_collect(cfg: dict, out: Path) -> dict:
    from .shadows.collect import collect_shadows

    trial = resolve_trial(cfg["trial"])
    ds = collect_shadows(trial, cfg["n_circuits"], cfg["shots"], resolve_noise(cfg["noise"]), cfg["seed"])
    path = out / "shadows.jsonl"
    ds.to_jsonl(path)
    return {"shadows": str(path), "n_circuits": ds.n_circuits, "trial_hash": ds.meta["trial_hash"]}


def cmd_calibrate(cfg: dict, out: Path) -> dict:
    from .plotting import plot_calibration
    from .robust import ratio_to_noiseless, run_calibration

    trial = resolve_trial(cfg["trial"], cfg["n"]) if "trial" in cfg else None
    rec = run_calibration(cfg["n"], cfg["n_circuits"], cfg["shots"], cfg["variant"],
                          resolve_noise(cfg["noise"]), cfg["seed"], trial)
    rec.save(out / "calibration.json")
    ratio, err = ratio_to_noiseless(rec)
    with open(out / "calibration.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["l", "f_tilde", "stderr", "ratio_to_noiseless", "ratio_stderr"])
        for l in range(rec.n + 1):
            w.writerow([l, repr(float(rec.f_tilde[l])), repr(float(rec.stderr[l])),
                        repr(float(ratio[l])), repr(float(err[l]))])
    plot_calibration(rec, out / "calibration.png")
    return {"f_tilde": [float(x) for x in rec.f_tilde], "calibration": str(out / "calibration.json")}


def _load_dataset(path: str):
    from .shadows.records import ShadowDataset

    if not Path(path).exists():
        raise ConfigError(f"shadow file {path} not found")
    return ShadowDataset.from_jsonl(path)


def _trial_from_meta(ds) -> "object":
    from .sim.circuit import Circuit
    from .sim.trial import TrialSpec

    meta = ds.meta
    if "trial" not in meta:
        raise ConfigError("shadow file metadata lacks the trial circuit")
    return TrialSpec(Circuit.from_dict(meta["trial"]), int(meta["zeta"]), meta.get("trial_label", "custom"))


def cmd_overlap_study(cfg: dict, out: Path) -> dict:
    from .experiments import overlap_study, random_walkers
    from .plotting import plot_overlap_study
    from .robust import CalibrationRecord
    from .shadows.channel import ChannelSpectrum

    ds = _load_dataset(cfg["shadows"])
    trial = _trial_from_meta(ds)
    spectra = {"raw": ChannelSpectrum.noiseless(ds.n)}
    if cfg["calibration"]:
        spectra["robust"] = CalibrationRecord.load(cfg["calibration"]).spectrum()
    walkers = random_walkers(ds.n, trial.zeta, cfg["n_walkers"], cfg["walker_seed"])
    study = overlap_study(ds, trial.state(), walkers, spectra, trial.zeta, cfg.get("prefixes"), cfg["forms"])
    study.to_csv(out / "overlap_study.csv")
    if cfg["plot"]:
        plot_overlap_study(study, out / "overlap_study.png")
    last = {f"{s}/{f}": {"amplitude_mae": study.mae(s, f)[-1], "ratio_mae": study.mae(s, f, "ratio")[-1]}
            for s, f in study.estimates}
    return {"n_ratios": study.n_ratios, "final": last}


def _backend(cfg, ham, chol, shadows_path):
    from .afqmc.backends import ExactBackend, ShadowBackend, TabulatedBackend
    from .robust import CalibrationRecord

    trial = resolve_trial(cfg["trial"], ham.n_spin, ham.n_electrons)
    if trial.n != ham.n_spin or trial.zeta != ham.n_electrons:
        raise ConfigError("trial and Hamiltonian disagree on qubit or particle number")
    if cfg["backend"] == "exact":
        return ExactBackend(ham, chol, trial.state())
    if cfg["backend"] == "tabulated":
        return TabulatedBackend.from_statevector(ham, chol, trial.state())
    if not shadows_path:
        raise ConfigError("shadow backend needs a 'shadows' file")
    ds = _load_dataset(shadows_path)
    spectrum = CalibrationRecord.load(cfg["calibration"]).spectrum() if cfg["calibration"] else None
    return ShadowBackend(ham, chol, ds, spectrum, cfg["form"])


def cmd_afqmc_run(cfg: dict, out: Path) -> dict:
    from .afqmc.driver import AfqmcConfig, run_afqmc
    from .hamiltonian import cholesky_decompose, exact_ground_state, jordan_wigner_map
    from .plotting import plot_energy_traces

    ham = resolve_hamiltonian(cfg["hamiltonian"])
    chol = cholesky_decompose(ham)
    run_keys = ("dt", "n_steps", "n_walkers", "mode", "e0", "max_fb", "reorth_period", "seed",
                "n_workers", "equil_fraction")
    acfg = AfqmcConfig(**{k: cfg[k] for k in run_keys})
    runs = {"main": cfg["shadows"]}
    if cfg["paired_shadows"]:
        runs["paired"] = cfg["paired_shadows"]
    e_fci = None
    if ham.n_spin <= 16:
        e_fci = exact_ground_state(jordan_wigner_map(ham, verify_cap=0), ham.n_electrons).energy
    traces, summary = {}, {"fci_energy": e_fci}
    for label, shadows in runs.items():
        backend = _backend(cfg, ham, chol, shadows)
        tr = run_afqmc(chol, backend, acfg)
        suffix = "" if label == "main" else f"_{label}"
        tr.to_csv(out / f"trace{suffix}.csv")
        tr.write_summary(out / f"run_summary{suffix}.json")
        traces[label] = tr
        summary[label] = tr.summary()
    if "paired" in traces:
        summary["fields_synchronized"] = traces["main"].field_hash == traces["paired"].field_hash
        summary["paired_difference"] = summary["main"]["energy_mean"] - summary["paired"]["energy_mean"]
    if cfg["plot"]:
        plot_energy_traces(traces, out / "trace.png", e_fci)
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


def cmd_fci(cfg: dict, out: Path | None) -> dict:
    from .hamiltonian import exact_ground_state, jordan_wigner_map

    ham = resolve_hamiltonian(cfg["hamiltonian"])
    qh = jordan_wigner_map(ham)
    sol = exact_ground_state(qh, ham.n_electrons, cfg["n_levels"])
    res = {"energy": sol.energy, "levels": [float(x) for x in sol.excited], "hf_energy": ham.hf_energy(),
           "n_qubits": ham.n_spin, "n_electrons": ham.n_electrons, "jw_verified": qh.verified}
    if out is not None:
        (out / "fci.json").write_text(json.dumps(res, indent=2))
    return res


def cmd_verify_theorem1(cfg: dict, out: Path | None) -> dict:
    from .experiments import verify_projector_identity

    rep = verify_projector_identity(cfg["n"], cfg["zeta"], cfg["n_random"], cfg["seed"])
    for line in rep.lines():
        print(line)
    res = {"n": rep.n, "zeta": rep.zeta, "b_formula": rep.b_formula.tolist(), "b_oracle": rep.b_oracle.tolist(),
           "max_error": rep.max_error, "passed": rep.passed}
    if out is not None:
        (out / "theorem1.json").write_text(json.dumps(res, indent=2))
    if not rep.passed:
        raise ArithmeticError("projector identity check failed")
    return res


COMMANDS = {
    "shadows-collect": cmd_shadows_collect,
    "calibrate": cmd_calibrate,
    "overlap-study": cmd_overlap_study,
    "afqmc-run": cmd_afqmc_run,
    "fci": cmd_fci,
    "verify-theorem1": cmd_verify_theorem1,
}


# ---------------------------------------------------------------- parser

def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"not valid JSON: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcqmc", description="Matchgate-shadow QC-AFQMC simulator")
    p.add_argument("--version", action="version", version=f"qcqmc {version_string()}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="YAML or JSON config; explicit flags override it")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="root seed (default 0)")
        return sp

    sp = add("shadows-collect", "collect Matchgate shadows of the trial superposition state")
    sp.add_argument("--trial", type=_json_arg, help='trial spec, e.g. \'{"type": "fixture", "name": "h2_sto3g_0.75"}\'')
    sp.add_argument("--n-circuits", type=int)
    sp.add_argument("--shots", type=int, help="shots per circuit (default 1024)")
    sp.add_argument("--noise", type=_json_arg, help="Pauli noise model as JSON")

    sp = add("calibrate", "calibrate the noisy channel spectrum from |0>")
    sp.add_argument("--n", type=int, help="qubit count")
    sp.add_argument("--n-circuits", type=int)
    sp.add_argument("--shots", type=int)
    sp.add_argument("--variant", choices=["bare-zero", "sp-compensated"])
    sp.add_argument("--noise", type=_json_arg)
    sp.add_argument("--trial", type=_json_arg, help="trial spec (sp-compensated variant)")

    sp = add("overlap-study", "amplitude and ratio MAE versus circuit count")
    sp.add_argument("--shadows", help="shadow JSONL file")
    sp.add_argument("--calibration", help="calibration JSON for robust estimates")
    sp.add_argument("--n-walkers", type=int, help="random walkers (default 16, giving 120 ratios)")
    sp.add_argument("--walker-seed", type=int)
    sp.add_argument("--no-plot", dest="plot", action="store_false", default=None)

    sp = add("afqmc-run", "phaseless or free-projection AFQMC")
    sp.add_argument("--hamiltonian", help="FCIDUMP path or bundled fixture name")
    sp.add_argument("--trial", type=_json_arg)
    sp.add_argument("--backend", choices=["exact", "tabulated", "shadow"])
    sp.add_argument("--shadows")
    sp.add_argument("--paired-shadows", help="second dataset run with synchronized fields")
    sp.add_argument("--calibration")
    sp.add_argument("--form", choices=["full", "factored"])
    sp.add_argument("--dt", type=float)
    sp.add_argument("--n-steps", type=int)
    sp.add_argument("--n-walkers", type=int)
    sp.add_argument("--mode", choices=["phaseless", "free"])
    sp.add_argument("--n-workers", type=int)
    sp.add_argument("--equil-fraction", type=float)
    sp.add_argument("--no-plot", dest="plot", action="store_false", default=None)

    sp = add("fci", "exact ground state in the particle sector")
    sp.add_argument("--hamiltonian")
    sp.add_argument("--n-levels", type=int)

    sp = add("verify-theorem1", "dense check of the sector-projected projector identity")
    sp.add_argument("--n", type=int)
    sp.add_argument("--zeta", type=int)
    sp.add_argument("--n-random", type=int)
    return p


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if args.config:
        loaded = load_config_file(args.config)
        if "command" in loaded and "config" in loaded:
            # a resolved_config.json from an earlier run
            if loaded["command"] != command:
                raise ConfigError(f"{args.config} was written by {loaded['command']!r}, not {command!r}")
            loaded = loaded["config"]
        cfg.update(loaded)
    skip = {"command", "config"}
    for k, v in vars(args).items():
        if k not in skip and v is not None:
            cfg[k] = v
    cfg = {k: v for k, v in cfg.items() if not (v is None and k in ("out",))}
    cfg.pop("schema_version", None)
    return validate(command, cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        out = Path(cfg["out"]) if cfg.get("out") else None
        if out is not None:
            write_resolved(out, args.command, cfg)
        result = COMMANDS[args.command](cfg, out)
    except (ConfigError, ParseError) as exc:
        print(f"qcqmc: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"qcqmc: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ArithmeticError, NotPSDError) as exc:
        print(f"qcqmc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QcqmcError, ValueError, OSError) as exc:
        print(f"qcqmc: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(result, indent=2, default=_json_default))
    return EXIT_OK


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


if __name__ == "__main__":
    sys.exit(main())
