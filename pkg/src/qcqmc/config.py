"""Run configurations: loading, schema validation and object resolution."""

from __future__ import annotations

import json
import os
import subprocess
from pathlib import Path

import jsonschema
import yaml

from . import __version__
from .errors import ConfigError
from .hamiltonian import MolecularHamiltonian, fixture_path, load_fcidump
from .sim.circuit import Circuit
from .sim.noise import PauliNoiseModel
from .sim.trial import TrialSpec, double_excitation_trial, identity_trial

SCHEMA_VERSION = 1

_TRIPLE = {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 3, "maxItems": 3}
NOISE_SCHEMA = {
    "type": ["object", "null"],
    "properties": {
        "default": _TRIPLE,
        "per_gate": {"type": "object", "additionalProperties": _TRIPLE},
        "readout": {"oneOf": [{"type": "number", "minimum": 0, "maximum": 1},
                              {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}}]},
        "include_state_prep": {"type": "boolean"},
        "global_depolarizing": {"type": "number", "minimum": 0, "maximum": 1},
        "coherent_rz": {"type": "number"},
    },
    "additionalProperties": False,
}
TRIAL_SCHEMA = {
    "type": "object",
    "properties": {
        "type": {"enum": ["ude", "hf", "circuit", "fixture"]},
        "theta": {"type": "number"},
        "name": {"type": "string"},
        "n": {"type": "integer", "minimum": 1},
        "zeta": {"type": "integer", "minimum": 0},
        "circuit": {"type": "object"},
    },
    "required": ["type"],
    "additionalProperties": False,
}
_COMMON = {
    "seed": {"type": "integer", "minimum": 0},
    "out": {"type": "string"},
    "schema_version": {"const": SCHEMA_VERSION},
}
_POS = {"type": "integer", "minimum": 1}

SCHEMAS = {
    "shadows-collect": {
        "properties": {**_COMMON, "trial": TRIAL_SCHEMA, "n_circuits": {"type": "integer", "minimum": 0},
                       "shots": _POS, "noise": NOISE_SCHEMA},
        "required": ["trial", "n_circuits"],
    },
    "calibrate": {
        "properties": {**_COMMON, "n": _POS, "n_circuits": _POS, "shots": _POS,
                       "variant": {"enum": ["bare-zero", "sp-compensated"]},
                       "noise": NOISE_SCHEMA, "trial": TRIAL_SCHEMA},
        "required": ["n", "n_circuits"],
    },
    "overlap-study": {
        "properties": {**_COMMON, "shadows": {"type": "string"}, "calibration": {"type": ["string", "null"]},
                       "n_walkers": {"type": "integer", "minimum": 2}, "walker_seed": {"type": "integer"},
                       "prefixes": {"type": "array", "items": _POS},
                       "forms": {"type": "array", "items": {"enum": ["full", "factored"]}},
                       "plot": {"type": "boolean"}},
        "required": ["shadows"],
    },
    "afqmc-run": {
        "properties": {**_COMMON, "hamiltonian": {"type": "string"}, "trial": TRIAL_SCHEMA,
                       "backend": {"enum": ["exact", "tabulated", "shadow"]},
                       "shadows": {"type": ["string", "null"]}, "paired_shadows": {"type": ["string", "null"]},
                       "calibration": {"type": ["string", "null"]},
                       "form": {"enum": ["full", "factored"]},
                       "dt": {"type": "number", "exclusiveMinimum": 0}, "n_steps": _POS, "n_walkers": _POS,
                       "mode": {"enum": ["phaseless", "free"]}, "n_workers": _POS,
                       "max_fb": {"type": "number", "exclusiveMinimum": 0}, "reorth_period": _POS,
                       "equil_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                       "e0": {"type": ["number", "null"]}, "plot": {"type": "boolean"}},
        "required": ["hamiltonian"],
    },
    "fci": {
        "properties": {**_COMMON, "hamiltonian": {"type": "string"}, "n_levels": _POS},
        "required": ["hamiltonian"],
    },
    "verify-theorem1": {
        "properties": {**_COMMON, "n": _POS, "zeta": {"type": "integer", "minimum": 0},
                       "n_random": _POS},
        "required": ["n", "zeta"],
    },
}
for _s in SCHEMAS.values():
    _s["type"] = "object"
    _s["additionalProperties"] = False


def load_config_file(path: str | os.PathLike) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def validate(command: str, cfg: dict) -> dict:
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc
    return cfg


def version_string() -> str:
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        desc = ""
    return f"{__version__}+g{desc}" if desc else __version__


def write_resolved(out: Path, command: str, cfg: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    payload = {"command": command, "version": version_string(), "schema_version": SCHEMA_VERSION, "config": cfg}
    (out / "resolved_config.json").write_text(json.dumps(payload, indent=2, sort_keys=True))


def resolve_hamiltonian(spec: str) -> MolecularHamiltonian:
    """A FCIDUMP path, or the name of a bundled fixture (with or without extension)."""
    if os.path.exists(spec):
        return load_fcidump(spec)
    name = spec if spec.endswith(".fcidump") else spec + ".fcidump"
    path = fixture_path(name)
    if not os.path.exists(path):
        raise ConfigError(f"no FCIDUMP at {spec!r} and no bundled fixture {name!r}")
    return load_fcidump(path)


def fixture_trials() -> dict:
    with open(fixture_path("trials.json")) as fh:
        return json.load(fh)


def resolve_trial(spec: dict, n: int | None = None, zeta: int | None = None) -> TrialSpec:
    kind = spec["type"]
    n = spec.get("n", n if n is not None else 4)
    zeta = spec.get("zeta", zeta if zeta is not None else 2)
    if kind == "ude":
        return double_excitation_trial(float(spec.get("theta", 0.0)), n, zeta)
    if kind == "hf":
        return identity_trial(n, zeta)
    if kind == "fixture":
        trials = fixture_trials()
        if spec.get("name") not in trials:
            raise ConfigError(f"unknown trial fixture {spec.get('name')!r}; have {sorted(trials)}")
        return double_excitation_trial(trials[spec["name"]]["theta"], n, zeta)
    if "circuit" not in spec:
        raise ConfigError("circuit trial needs a 'circuit' mapping")
    return TrialSpec(Circuit.from_dict(spec["circuit"]), zeta, "circuit")


def resolve_noise(spec: dict | None) -> PauliNoiseModel | None:
    return PauliNoiseModel.from_dict(spec)
