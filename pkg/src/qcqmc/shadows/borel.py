"""Signed permutations: the Borel group B(2n) of Matchgate-Clifford circuits."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from typing import Iterator

import numpy as np


@dataclass(frozen=True, eq=False)
class SignedPermutation:
    """Orthogonal ``Q`` with ``Q[perm[mu], mu] = signs[mu]``."""

    perm: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        signs = np.asarray(self.signs, dtype=np.int64)
        m = perm.size
        if m % 2 or sorted(perm.tolist()) != list(range(m)):
            raise ValueError("perm must be a permutation of 0..2n-1")
        if signs.shape != perm.shape or not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be +-1 with one entry per index")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "signs", signs)

    @property
    def n(self) -> int:
        return self.perm.size // 2

    def matrix(self) -> np.ndarray:
        q = np.zeros((self.perm.size, self.perm.size))
        q[self.perm, np.arange(self.perm.size)] = self.signs
        return q

    @classmethod
    def from_matrix(cls, q: np.ndarray) -> "SignedPermutation":
        q = np.asarray(q)
        rows = np.argmax(np.abs(q), axis=0)
        signs = np.sign(q[rows, np.arange(q.shape[1])]).astype(np.int64)
        out = cls(rows, signs)
        if not np.array_equal(out.matrix(), q):
            raise ValueError("matrix is not a signed permutation")
        return out

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(np.arange(2 * n), np.ones(2 * n, dtype=np.int64))

    def __matmul__(self, other: "SignedPermutation") -> "SignedPermutation":
        # (A B)[perm_a[perm_b[mu]], mu] = sign_a[perm_b[mu]] sign_b[mu]
        return SignedPermutation(self.perm[other.perm], self.signs[other.perm] * other.signs)

    def transpose(self) -> "SignedPermutation":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return SignedPermutation(inv, self.signs[inv])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SignedPermutation)
            and np.array_equal(self.perm, other.perm)
            and np.array_equal(self.signs, other.signs)
        )

    def __hash__(self) -> int:
        return hash((self.perm.tobytes(), self.signs.tobytes()))

    def to_dict(self) -> dict:
        return {"perm": self.perm.tolist(), "signs": self.signs.tolist()}


def sample_signed_permutation(n: int, rng: np.random.Generator) -> SignedPermutation:
    """Uniform element of B(2n): Fisher-Yates permutation and independent fair signs."""
    if n < 1:
        raise ValueError("n must be at least 1")
    perm = rng.permutation(2 * n)
    signs = 1 - 2 * rng.integers(0, 2, size=2 * n)
    return SignedPermutation(perm, signs)


def borel_group_size(n: int) -> int:
    from math import factorial

    return 2 ** (2 * n) * factorial(2 * n)


def enumerate_borel(n: int) -> Iterator[SignedPermutation]:
    """Every element of B(2n); practical for n <= 2 (384 elements)."""
    m = 2 * n
    for perm in permutations(range(m)):
        for signs in product((1, -1), repeat=m):
            yield SignedPermutation(np.array(perm), np.array(signs))
