"""Single-walker wrappers around the batched kernels."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..slater import SlaterDeterminant
from .backends import TrialBackend
from .energy import orthonormalize
from .propagation import FieldSample, PropagatorContext, force_bias, phaseless_factor, propagate_orbitals


@dataclass(frozen=True)
class Walker:
    """Orbitals ``v`` (not necessarily orthonormal), weight, phase and cached trial overlap."""

    v: np.ndarray
    weight: float = 1.0
    phase: float = 0.0
    overlap: complex = 0.0
    steps: int = 0

    @classmethod
    def from_determinant(cls, det: SlaterDeterminant, backend: TrialBackend) -> "Walker":
        v = det.v * det.coeff ** (1.0 / max(det.v.shape[1], 1))
        return cls(v, 1.0, 0.0, complex(backend.overlap(v[None])[0]))


def _orthonormal(v: np.ndarray) -> np.ndarray:
    return orthonormalize(v[None])[0][0]


def walker_local_energy(walker: Walker, backend: TrialBackend) -> complex:
    return complex(backend.evaluate(_orthonormal(walker.v)[None]).local_energy[0])


def walker_force_bias(walker: Walker, backend: TrialBackend, ctx: PropagatorContext) -> np.ndarray:
    mixed = backend.evaluate(_orthonormal(walker.v)[None]).mixed_l
    return force_bias(mixed, ctx)[0]


def propagate_walker(walker: Walker, fields: FieldSample, ctx: PropagatorContext,
                     backend: TrialBackend) -> tuple[Walker, complex]:
    """Apply ``B(x - xbar)`` and return the new walker and the overlap ratio.

    The cached overlap always refers to the stored orbitals; re-orthonormalization
    divides it by ``det R`` so later ratios are unaffected.
    """
    f = FieldSample(np.atleast_2d(fields.x), np.atleast_2d(fields.xbar))
    v_new, phase = propagate_orbitals(walker.v[None], f, ctx)
    ov_new = complex(backend.overlap(v_new)[0])
    ratio = complex(phase[0]) * ov_new / walker.overlap
    v = v_new[0]
    steps = walker.steps + 1
    if steps % ctx.reorth_period == 0:
        q, det_r = orthonormalize(v[None])
        v = q[0]
        ov_new = ov_new / det_r[0]
    return replace(walker, v=v, overlap=ov_new, steps=steps), ratio


def update_weight_phaseless(walker: Walker, e_loc: complex, ratio: complex, ctx: PropagatorContext) -> Walker:
    factor = phaseless_factor(np.array([e_loc]), np.array([ratio]), ctx)[0]
    return replace(walker, weight=float(walker.weight * factor))
