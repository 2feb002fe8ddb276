"""Compile signed permutations into Matchgate circuits.

The Givens rotation ``G(a, t) = exp(t/2 gamma_a gamma_{a+1})`` maps
``gamma_a -> cos t gamma_a - sin t gamma_{a+1}`` and
``gamma_{a+1} -> sin t gamma_a + cos t gamma_{a+1}``.  For ``a = 2j`` it is
``RZ(-t)`` on qubit ``j``; for ``a = 2j + 1`` it is ``MG(-t, XX)`` on qubits
``j, j + 1``.  A circuit ``U_k ... U_1`` realizes ``Q = Q_k ... Q_1``.
"""

from __future__ import annotations

import numpy as np

from ..sim.circuit import Circuit
from .borel import SignedPermutation


def givens_matrix(m: int, a: int, t: float) -> np.ndarray:
    g = np.eye(m)
    c, s = np.cos(t), np.sin(t)
    g[a, a] = c
    g[a + 1, a] = -s
    g[a, a + 1] = s
    g[a + 1, a + 1] = c
    return g


def _append_givens(c: Circuit, a: int, t: float) -> None:
    j, odd = divmod(a, 2)
    if odd:
        c.append("MG", (j, j + 1), (-t,), "XX")
    else:
        c.append("RZ", (j,), (-t,))


def _reduction_steps(q: np.ndarray) -> tuple[list[tuple[int, float]], bool]:
    """Givens steps ``G_1 .. G_k`` and a final reflection flag with ``Q = G_1 ... G_k R``."""
    m = q.shape[0]
    mat = np.array(q, dtype=float)
    steps: list[tuple[int, float]] = []

    def left_apply(a, t):
        nonlocal mat
        mat = givens_matrix(m, a, t).T @ mat
        steps.append((a, t))

    if np.all(np.isin(np.round(mat, 12), (-1.0, 0.0, 1.0))):
        # signed permutation: bubble sort rows by the column of their nonzero entry
        cols = list(np.argmax(np.abs(mat), axis=1))
        for _ in range(m):
            swapped = False
            for a in range(m - 1):
                if cols[a] > cols[a + 1]:
                    left_apply(a, np.pi / 2)
                    cols[a], cols[a + 1] = cols[a + 1], cols[a]
                    swapped = True
            if not swapped:
                break
    else:
        # general orthogonal: zero the subdiagonal column by column, bottom up
        for col in range(m - 1):
            for a in range(m - 2, col - 1, -1):
                if abs(mat[a + 1, col]) > 1e-15:
                    left_apply(a, np.arctan2(-mat[a + 1, col], mat[a, col]))
    signs = np.sign(np.diag(mat))
    neg = [int(i) for i in np.flatnonzero(signs < 0)]
    reflect = len(neg) % 2 == 1
    if reflect:
        # the last index is flipped by an X on the last qubit
        if neg and neg[-1] == m - 1:
            neg.pop()
        else:
            neg.append(m - 1)
    for i, j in zip(neg[0::2], neg[1::2]):
        for a in range(i, j):
            left_apply(a, np.pi)
    return steps, reflect


def compile_matchgate_circuit(q: SignedPermutation | np.ndarray) -> Circuit:
    """Circuit ``U`` with ``U gamma_mu U^dagger = sum_nu Q[nu, mu] gamma_nu``."""
    mat = q.matrix() if isinstance(q, SignedPermutation) else np.asarray(q, dtype=float)
    m = mat.shape[0]
    if np.max(np.abs(mat.T @ mat - np.eye(m))) > 1e-12:
        raise ValueError("Q is not orthogonal")
    steps, reflect = _reduction_steps(mat)
    c = Circuit(m // 2)
    # Q = G_1 ... G_k R: the reflection acts first, G_1 last
    if reflect:
        c.append("X", (m // 2 - 1,))
    for a, t in reversed(steps):
        _append_givens(c, a, t)
    return c


def circuit_orthogonal(c: Circuit) -> np.ndarray:
    """Orthogonal matrix of a circuit built from RZ, MG(XX) and X gates."""
    m = 2 * c.n_qubits
    out = np.eye(m)
    for g in c.gates:
        if g.name == "RZ":
            step = givens_matrix(m, 2 * g.qubits[0], -g.params[0])
        elif g.name == "MG" and g.paulis == "XX" and g.qubits[1] == g.qubits[0] + 1:
            step = givens_matrix(m, 2 * g.qubits[0] + 1, -g.params[0])
        elif g.name == "X" and g.qubits[0] == c.n_qubits - 1:
            step = np.eye(m)
            step[m - 1, m - 1] = -1
        else:
            raise ValueError(f"gate {g.name} on {g.qubits} is not a compiled Matchgate")
        out = step @ out
    return out
