"""Pauli strings, Pauli sums and Jordan-Wigner Majorana operators.

A Pauli string on n qubits is stored as ``phase * X^x Z^z`` where ``x`` and
``z`` are integer bit masks.  Qubit 0 is the most significant bit of a
computational-basis index, so qubit ``j`` owns bit ``n - 1 - j``.  With this
layout a statevector reshaped to ``(2,) * n`` has axis ``j`` for qubit ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

_PHASES = (1, 1j, -1, -1j)


def qubit_bit(n: int, j: int) -> int:
    """Bit mask of qubit ``j`` in an ``n``-qubit basis index."""
    return 1 << (n - 1 - j)


def popcount(v) -> np.ndarray | int:
    if isinstance(v, (int, np.integer)):
        return int(v).bit_count()
    v = np.asarray(v, dtype=np.int64)
    out = np.zeros(v.shape, dtype=np.int64)
    while np.any(v):
        out += v & 1
        v = v >> 1
    return out


def _phase_index(phase: complex) -> int:
    for k, p in enumerate(_PHASES):
        if abs(phase - p) < 1e-12:
            return k
    raise ValueError(f"phase {phase} is not in {{1, i, -1, -i}}")


@dataclass(frozen=True)
class PauliString:
    """``i**k * X^x Z^z`` on ``n`` qubits; the phase is tracked exactly by ``k``."""

    n: int
    x: int
    z: int
    k: int = 0

    @property
    def phase(self) -> complex:
        return _PHASES[self.k % 4]

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_label(cls, label: str, phase: complex = 1) -> "PauliString":
        n = len(label)
        x = z = 0
        ny = 0
        for j, ch in enumerate(label.upper()):
            bit = qubit_bit(n, j)
            if ch == "X":
                x |= bit
            elif ch == "Z":
                z |= bit
            elif ch == "Y":
                x |= bit
                z |= bit
                ny += 1
            elif ch != "I":
                raise ValueError(f"invalid Pauli letter {ch!r}")
        # Y = i X Z
        return cls(n, x, z, (_phase_index(phase) + ny) % 4)

    def label(self) -> tuple[complex, str]:
        """Return ``(c, word)`` with ``self == c * word`` and word over I,X,Y,Z."""
        chars = []
        ny = 0
        for j in range(self.n):
            bit = qubit_bit(self.n, j)
            xb, zb = bool(self.x & bit), bool(self.z & bit)
            if xb and zb:
                chars.append("Y")
                ny += 1
            elif xb:
                chars.append("X")
            elif zb:
                chars.append("Z")
            else:
                chars.append("I")
        return _PHASES[(self.k - ny) % 4], "".join(chars)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        # Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
        sign = 2 * (popcount(self.z & other.x) % 2)
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z,
                           (self.k + other.k + sign) % 4)

    def dagger(self) -> "PauliString":
        # (X^x Z^z)^dagger = Z^z X^x = (-1)^{|x & z|} X^x Z^z
        sign = 2 * (popcount(self.x & self.z) % 2)
        return PauliString(self.n, self.x, self.z, (-self.k + sign) % 4)

    def commutes(self, other: "PauliString") -> bool:
        return (popcount(self.x & other.z) + popcount(self.z & other.x)) % 2 == 0

    def action(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Images and amplitudes: ``P|s> = amp * |s ^ x>`` for integer basis states."""
        states = np.asarray(states, dtype=np.int64)
        signs = 1 - 2 * (popcount(states & self.z) % 2)
        return states ^ self.x, self.phase * signs

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n
        cols = np.arange(dim)
        rows, amps = self.action(cols)
        out = np.zeros((dim, dim), dtype=complex)
        out[rows, cols] = amps
        return out


def majorana(n: int, mu: int) -> PauliString:
    """Jordan-Wigner Majorana ``gamma_mu``; ``gamma_{2j} = Z_{<j} X_j``, ``gamma_{2j+1} = Z_{<j} Y_j``."""
    if not 0 <= mu < 2 * n:
        raise ValueError(f"Majorana index {mu} out of range for n={n}")
    j, odd = divmod(mu, 2)
    zs = 0
    for q in range(j):
        zs |= qubit_bit(n, q)
    bit = qubit_bit(n, j)
    if odd:
        return PauliString(n, bit, zs | bit, 1)
    return PauliString(n, bit, zs, 0)


def majorana_product(n: int, subset: Iterable[int]) -> PauliString:
    """Ordered product ``gamma_{s1} gamma_{s2} ...`` of the given indices."""
    out = PauliString.identity(n)
    for mu in subset:
        out = out * majorana(n, mu)
    return out


class PauliSum:
    """Sparse linear combination of Pauli strings keyed by ``(x, z)`` masks."""

    def __init__(self, n: int, terms: Mapping[tuple[int, int], complex] | None = None):
        self.n = n
        self.terms: dict[tuple[int, int], complex] = dict(terms or {})

    @classmethod
    def from_string(cls, p: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls(p.n, {(p.x, p.z): coeff * p.phase})

    def copy(self) -> "PauliSum":
        return PauliSum(self.n, self.terms)

    def add_term(self, x: int, z: int, coeff: complex) -> None:
        self.terms[(x, z)] = self.terms.get((x, z), 0.0) + coeff

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = self.copy()
        for key, c in other.terms.items():
            out.add_term(*key, c)
        return out

    def scale(self, c: complex) -> "PauliSum":
        return PauliSum(self.n, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.n)
        for (x1, z1), c1 in self.terms.items():
            for (x2, z2), c2 in other.terms.items():
                sign = -1 if popcount(z1 & x2) % 2 else 1
                out.add_term(x1 ^ x2, z1 ^ z2, sign * c1 * c2)
        return out

    def simplify(self, tol: float = 1e-14) -> "PauliSum":
        return PauliSum(self.n, {k: v for k, v in self.terms.items() if abs(v) > tol})

    def labelled(self, tol: float = 1e-14) -> dict[str, complex]:
        """Map from Pauli words to coefficients in the I,X,Y,Z convention."""
        out: dict[str, complex] = {}
        for (x, z), c in self.terms.items():
            ph, word = PauliString(self.n, x, z, 0).label()
            val = out.get(word, 0.0) + c * ph
            out[word] = val
        return {w: c for w, c in out.items() if abs(c) > tol}

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n
        cols = np.arange(dim, dtype=np.int64)
        out = np.zeros((dim, dim), dtype=complex)
        for (x, z), c in self.terms.items():
            signs = 1 - 2 * (popcount(cols & z) % 2)
            out[cols ^ x, cols] += c * signs
        return out


def jw_annihilation(n: int, p: int) -> PauliSum:
    """``a_p = (gamma_{2p} + i gamma_{2p+1}) / 2``."""
    return PauliSum.from_string(majorana(n, 2 * p), 0.5) + PauliSum.from_string(
        majorana(n, 2 * p + 1), 0.5j
    )


def jw_creation(n: int, p: int) -> PauliSum:
    """``a_p^dagger = (gamma_{2p} - i gamma_{2p+1}) / 2``."""
    return PauliSum.from_string(majorana(n, 2 * p), 0.5) + PauliSum.from_string(
        majorana(n, 2 * p + 1), -0.5j
    )
