"""Shadow datasets and their JSONL boundary format.

One JSON object per line and per circuit::

    {"n": 4, "perm": [...], "signs": [...], "counts": {"0110": 12, ...}}

Metadata (seed, noise spec, trial hash, ...) lives in a ``.meta.json`` sidecar.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyDatasetError, ParseError
from ..sim.noise import MeasurementRecord
from .borel import SignedPermutation


@dataclass(frozen=True)
class MatchgateShadowSample:
    q: SignedPermutation
    outcomes: tuple[MeasurementRecord, ...]

    def __post_init__(self):
        for rec in self.outcomes:
            if len(rec.bitstring) != self.q.n:
                raise ValueError("bitstring length does not match n")

    @property
    def shots(self) -> int:
        return sum(r.multiplicity for r in self.outcomes)


@dataclass
class ShadowDataset:
    """Columnar storage: per-circuit ``perms``/``signs`` and per-outcome rows."""

    n: int
    perms: np.ndarray  # (N, 2n)
    signs: np.ndarray  # (N, 2n)
    circuit: np.ndarray  # (M,) circuit index of each distinct outcome
    bits: np.ndarray  # (M, n)
    counts: np.ndarray  # (M,)
    meta: dict = field(default_factory=dict)

    @property
    def n_circuits(self) -> int:
        return self.perms.shape[0]

    @property
    def shots(self) -> np.ndarray:
        return np.bincount(self.circuit, weights=self.counts, minlength=self.n_circuits)

    def require_nonempty(self) -> None:
        if self.n_circuits == 0:
            raise EmptyDatasetError("shadow dataset has no circuits")

    @classmethod
    def from_samples(cls, samples, meta: dict | None = None) -> "ShadowDataset":
        samples = list(samples)
        if not samples:
            raise EmptyDatasetError("no shadow samples")
        n = samples[0].q.n
        circ, bits, counts = [], [], []
        for i, s in enumerate(samples):
            for rec in s.outcomes:
                circ.append(i)
                bits.append([int(c) for c in rec.bitstring])
                counts.append(rec.multiplicity)
        return cls(
            n,
            np.array([s.q.perm for s in samples]),
            np.array([s.q.signs for s in samples]),
            np.array(circ, dtype=np.int64),
            np.array(bits, dtype=np.int64).reshape(-1, n),
            np.array(counts, dtype=float),
            dict(meta or {}),
        )

    def samples(self):
        for i in range(self.n_circuits):
            rows = np.flatnonzero(self.circuit == i)
            recs = tuple(
                MeasurementRecord("".join(map(str, self.bits[r])), int(self.counts[r])) for r in rows
            )
            yield MatchgateShadowSample(SignedPermutation(self.perms[i], self.signs[i]), recs)

    def prefix(self, k: int) -> "ShadowDataset":
        """The first ``k`` circuits."""
        keep = self.circuit < k
        return ShadowDataset(
            self.n, self.perms[:k], self.signs[:k], self.circuit[keep], self.bits[keep],
            self.counts[keep], dict(self.meta),
        )

    def to_jsonl(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            for s in self.samples():
                rec = {
                    "n": self.n,
                    "perm": s.q.perm.tolist(),
                    "signs": s.q.signs.tolist(),
                    "counts": {r.bitstring: r.multiplicity for r in s.outcomes},
                }
                fh.write(json.dumps(rec) + "\n")
        with open(meta_path(path), "w") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True)

    @classmethod
    def from_jsonl(cls, path: str | os.PathLike) -> "ShadowDataset":
        samples = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    q = SignedPermutation(np.array(rec["perm"]), np.array(rec["signs"]))
                    outs = tuple(MeasurementRecord(b, int(c)) for b, c in rec["counts"].items())
                    if q.n != rec["n"]:
                        raise ValueError("n does not match perm length")
                    samples.append(MatchgateShadowSample(q, outs))
                except (KeyError, ValueError, TypeError) as exc:
                    raise ParseError(f"bad shadow record: {exc}", lineno) from None
        meta = {}
        if os.path.exists(meta_path(path)):
            with open(meta_path(path)) as fh:
                meta = json.load(fh)
        return cls.from_samples(samples, meta)


def meta_path(path) -> str:
    path = str(path)
    base = path[: -len(".jsonl")] if path.endswith(".jsonl") else path
    return base + ".meta.json"
