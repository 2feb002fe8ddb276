"""Gate set, circuits and their JSON serialization.

Circuit JSON schema::

    {"n_qubits": 4,
     "gates": [{"name": "H", "qubits": [0], "params": []},
               {"name": "MG", "qubits": [1, 2], "params": [0.3], "paulis": "XX"}]}

Gate names: ``H X Y Z RZ RY CNOT MG UDE``.  ``MG`` is
``exp(-i theta/2 P (x) P')`` on adjacent qubits with ``paulis`` in
``{XX, XY, YX, YY}``.  ``UDE`` is the four-qubit double-excitation gate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

_SQ = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
ARITY = {"H": 1, "X": 1, "Y": 1, "Z": 1, "RZ": 1, "RY": 1, "CNOT": 2, "MG": 2, "UDE": 4}
N_PARAMS = {"RZ": 1, "RY": 1, "MG": 1, "UDE": 1}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    paulis: str = ""

    def __post_init__(self):
        if self.name not in ARITY:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(self.qubits) != ARITY[self.name]:
            raise ValueError(f"{self.name} acts on {ARITY[self.name]} qubits")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.name} has repeated qubits {self.qubits}")
        if len(self.params) != N_PARAMS.get(self.name, 0):
            raise ValueError(f"{self.name} expects {N_PARAMS.get(self.name, 0)} parameters")
        if self.name == "MG":
            if self.paulis not in ("XX", "XY", "YX", "YY"):
                raise ValueError(f"MG Pauli pair must be over X, Y; got {self.paulis!r}")
            if abs(self.qubits[0] - self.qubits[1]) != 1:
                raise ValueError("Matchgate rotations act on adjacent qubits only")

    def matrix(self) -> np.ndarray:
        return gate_matrix(self)

    def to_dict(self) -> dict:
        d = {"name": self.name, "qubits": list(self.qubits), "params": list(self.params)}
        if self.paulis:
            d["paulis"] = self.paulis
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        return cls(d["name"], tuple(int(q) for q in d["qubits"]),
                   tuple(float(p) for p in d.get("params", ())), d.get("paulis", ""))


def ude_matrix(theta: float) -> np.ndarray:
    """Double excitation: rotates |1100> and |0011>, fixes the other 14 states."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    u = np.eye(16, dtype=complex)
    a, b = 0b1100, 0b0011
    u[a, a] = c
    u[b, a] = -s
    u[a, b] = s
    u[b, b] = c
    return u


def gate_matrix(g: Gate) -> np.ndarray:
    """Dense matrix with the gate's first qubit as the most significant bit."""
    if g.name in _SQ:
        return _SQ[g.name]
    if g.name == "RZ":
        t = g.params[0]
        return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    if g.name == "RY":
        c, s = np.cos(g.params[0] / 2), np.sin(g.params[0] / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if g.name == "CNOT":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if g.name == "MG":
        pp = np.kron(_SQ[g.paulis[0]], _SQ[g.paulis[1]])
        t = g.params[0]
        return np.cos(t / 2) * np.eye(4) - 1j * np.sin(t / 2) * pp
    if g.name == "UDE":
        return ude_matrix(g.params[0])
    raise ValueError(g.name)


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        if any(not 0 <= q < self.n_qubits for q in g.qubits):
            raise ValueError(f"gate {g.name} on {g.qubits} out of range for {self.n_qubits} qubits")

    def append(self, name: str, qubits, params=(), paulis: str = "") -> "Circuit":
        g = Gate(name, tuple(qubits), tuple(params), paulis)
        self._check(g)
        self.gates.append(g)
        return self

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")
        return Circuit(self.n_qubits, self.gates + other.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "gates": [g.to_dict() for g in self.gates]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        return cls(int(d["n_qubits"]), [Gate.from_dict(g) for g in d["gates"]])

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))

    def unitary(self) -> np.ndarray:
        """Dense unitary (small circuits only)."""
        from .statevector import apply_circuit

        dim = 1 << self.n_qubits
        cols = apply_circuit(np.eye(dim, dtype=complex), self)
        return cols.T
