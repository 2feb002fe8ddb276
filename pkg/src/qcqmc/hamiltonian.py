"""Electronic-structure Hamiltonians: FCIDUMP ingestion, Cholesky form,
Jordan-Wigner qubit form and exact sector diagonalization.

Conventions used throughout the package:

* spin orbitals are interleaved, spatial orbital ``k`` maps to spin orbitals
  ``2k`` (up) and ``2k + 1`` (down), which are also the qubit indices;
* two-electron integrals are stored in physicist order,
  ``H = H0 + sum h_ij a+_i a_j + 1/2 sum V_ijkl a+_i a+_j a_l a_k`` with
  ``V_ijkl = <ij|kl> = (ik|jl)``;
* the Hartree-Fock reference occupies spin orbitals ``0 .. zeta-1``.
"""

from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import NotPSDError, ParseError, ResourceError, UnsupportedSystemError
from .pauli import PauliString, PauliSum, jw_annihilation, jw_creation, popcount, qubit_bit

SYMMETRY_TOL = 1e-12
DENSE_VERIFY_CAP = 8
FCI_MAX_QUBITS = 16
FCI_MAX_DIM = 200_000


@dataclass(frozen=True)
class MolecularHamiltonian:
    """Second-quantized Hamiltonian over interleaved spin orbitals (Hartree)."""

    n_spatial: int
    n_electrons: int
    h0: float
    h: np.ndarray
    v: np.ndarray
    ms2: int = 0

    def __post_init__(self):
        n = 2 * self.n_spatial
        if self.h.shape != (n, n) or self.v.shape != (n, n, n, n):
            raise ValueError("integral shapes do not match n_spin")
        if self.n_electrons % 2:
            raise UnsupportedSystemError(
                f"odd electron count {self.n_electrons} is not supported"
            )
        if not 0 <= self.n_electrons <= n:
            raise ValueError(f"electron count {self.n_electrons} outside [0, {n}]")
        if np.max(np.abs(self.h - self.h.conj().T), initial=0.0) > SYMMETRY_TOL:
            raise ValueError("one-body matrix is not Hermitian")
        v = self.v
        for perm in ((1, 0, 3, 2), (2, 1, 0, 3), (0, 3, 2, 1), (2, 3, 0, 1)):
            if np.max(np.abs(v - v.transpose(perm)), initial=0.0) > SYMMETRY_TOL:
                raise ValueError("two-body tensor lacks the 8-fold real symmetry")

    @property
    def n_spin(self) -> int:
        return 2 * self.n_spatial

    @property
    def zeta(self) -> int:
        return self.n_electrons

    def hf_occupation(self) -> np.ndarray:
        occ = np.zeros(self.n_spin)
        occ[: self.n_electrons] = 1.0
        return occ

    def hf_energy(self) -> float:
        o = np.arange(self.n_electrons)
        e = self.h0 + np.sum(self.h[o, o])
        vv = self.v[np.ix_(o, o, o, o)]
        e += 0.5 * (np.einsum("ijij->", vv) - np.einsum("ijji->", vv))
        return float(np.real(e))


# ---------------------------------------------------------------- FCIDUMP


def _parse_header(text: str, first_line: int) -> dict[str, list[str]]:
    body = re.sub(r"^\s*[&$]FCI", "", text, flags=re.IGNORECASE)
    body = re.sub(r"([&$]END|/)\s*$", "", body.strip(), flags=re.IGNORECASE)
    parts = re.split(r"([A-Za-z_][A-Za-z_0-9]*)\s*=", body)
    if parts[0].strip(" ,\n"):
        raise ParseError(f"unexpected header content {parts[0].strip()!r}", first_line)
    out = {}
    for key, val in zip(parts[1::2], parts[2::2]):
        out[key.upper()] = [t for t in re.split(r"[,\s]+", val.strip()) if t]
    return out


def _header_int(header, key, line) -> int:
    if key not in header or len(header[key]) != 1:
        raise ParseError(f"header is missing a scalar {key}", line)
    try:
        return int(header[key][0])
    except ValueError:
        raise ParseError(f"header field {key} is not an integer", line) from None


def parse_fcidump(text: str | bytes) -> MolecularHamiltonian:
    """Parse FCIDUMP text (chemist integrals over spatial orbitals, 1-based)."""
    if isinstance(text, bytes):
        text = text.decode()
    lines = text.splitlines()
    end = None
    for idx, line in enumerate(lines):
        if re.search(r"([&$]END|/\s*$)", line, flags=re.IGNORECASE):
            end = idx
            break
    if end is None or not re.match(r"\s*[&$]FCI", lines[0] if lines else "", re.IGNORECASE):
        raise ParseError("missing &FCI ... &END header", 1)
    header = _parse_header("\n".join(lines[: end + 1]), 1)
    norb = _header_int(header, "NORB", 1)
    nelec = _header_int(header, "NELEC", 1)
    ms2 = _header_int(header, "MS2", 1) if "MS2" in header else 0
    if norb < 1:
        raise ParseError("NORB must be positive", 1)
    if nelec % 2:
        raise UnsupportedSystemError(f"odd electron count NELEC={nelec} is not supported")

    h0 = 0.0
    h = np.zeros((norb, norb))
    g = np.zeros((norb, norb, norb, norb))
    for lineno, line in enumerate(lines[end + 1 :], start=end + 2):
        tok = line.split()
        if not tok:
            continue
        if len(tok) != 5:
            raise ParseError(f"expected 'value i j k l', got {line.strip()!r}", lineno)
        try:
            val = float(tok[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(t) for t in tok[1:])
        except ValueError:
            raise ParseError(f"malformed record {line.strip()!r}", lineno) from None
        if min(i, j, k, l) < 0 or max(i, j, k, l) > norb:
            raise ParseError(f"orbital index out of range 0..{norb}", lineno)
        if i == j == k == l == 0:
            h0 = val
        elif k == 0 and l == 0:
            if j == 0:
                continue  # orbital energy record
            h[i - 1, j - 1] = h[j - 1, i - 1] = val
        elif i == 0 or j == 0 or k == 0 or l == 0:
            raise ParseError("two-electron record with a zero index", lineno)
        else:
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in ((p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r)):
                g[a, b, c, d] = g[c, d, a, b] = val
    return from_spatial_integrals(h0, h, g, nelec, ms2)


def load_fcidump(path: str | os.PathLike) -> MolecularHamiltonian:
    with open(path, "rb") as fh:
        return parse_fcidump(fh.read())


def fixture_path(name: str) -> str:
    """Absolute path of a bundled data file (e.g. ``h2_sto3g_0.75.fcidump``)."""
    return str(resources.files("qcqmc") / "data" / name)


def from_spatial_integrals(h0, h, g_chem, n_electrons, ms2=0) -> MolecularHamiltonian:
    """Expand spatial chemist integrals ``(pq|rs)`` to interleaved spin orbitals."""
    h = np.asarray(h, dtype=float)
    g_chem = np.asarray(g_chem, dtype=float)
    norb = h.shape[0]
    n = 2 * norb
    eye2 = np.eye(2)
    h_spin = np.kron(h, eye2)
    phys = g_chem.transpose(0, 2, 1, 3)  # <pq|rs> = (pr|qs)
    v_spin = np.einsum("pqrs,ac,bd->paqbrcsd", phys, eye2, eye2).reshape(n, n, n, n)
    return MolecularHamiltonian(norb, int(n_electrons), float(h0), h_spin, v_spin, int(ms2))


def write_fcidump(path, h0, h, g_chem, n_electrons, ms2=0, tol=1e-15) -> None:
    """Write spatial chemist integrals in FCIDUMP form (unique index quartets)."""
    h = np.asarray(h)
    norb = h.shape[0]
    buf = io.StringIO()
    buf.write(f" &FCI NORB={norb},NELEC={n_electrons},MS2={ms2},\n")
    buf.write("  ORBSYM=" + "1," * norb + "\n  ISYM=1,\n &END\n")
    for p in range(norb):
        for q in range(p + 1):
            for r in range(norb):
                for s in range(r + 1):
                    if p * (p + 1) // 2 + q < r * (r + 1) // 2 + s:
                        continue
                    if abs(g_chem[p, q, r, s]) > tol:
                        buf.write(f"{g_chem[p, q, r, s]: .16e} {p + 1} {q + 1} {r + 1} {s + 1}\n")
    for p in range(norb):
        for q in range(p + 1):
            if abs(h[p, q]) > tol:
                buf.write(f"{h[p, q]: .16e} {p + 1} {q + 1} 0 0\n")
    buf.write(f"{h0: .16e} 0 0 0 0\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


# ---------------------------------------------------------------- Cholesky


@dataclass(frozen=True)
class CholeskyFactorization:
    """Cholesky form of the two-body term with a Hartree-Fock mean-field shift.

    ``H = h0_shift + v0 + 1/2 sum_g (L_g - m_g)^2`` where ``L_g`` is the
    one-body operator with matrix ``vectors[g]``, ``m_g`` its Hartree-Fock
    expectation and ``v_g = i L_g``.  ``mf_shift`` holds ``<v_g> = i m_g``.
    """

    vectors: np.ndarray  # (L, n, n)
    v0: np.ndarray
    mf_shift: np.ndarray
    h0_shift: float
    tol: float

    @property
    def n_vectors(self) -> int:
        return self.vectors.shape[0]

    @property
    def mean_field(self) -> np.ndarray:
        """Hartree-Fock expectation values ``m_g`` of ``L_g``."""
        return (-1j * self.mf_shift).real

    def reconstruct(self) -> np.ndarray:
        """Rebuild ``V_ijkl = sum_g L_ik conj(L_lj)``."""
        n = self.v0.shape[0]
        if self.n_vectors == 0:
            return np.zeros((n, n, n, n))
        return np.einsum("gik,glj->ijkl", self.vectors, self.vectors.conj())


def _pivoted_cholesky(m: np.ndarray, tol: float) -> np.ndarray:
    diag = np.real(np.diag(m)).copy()
    vecs = []
    if diag.size and diag.min() < -tol:
        raise NotPSDError(f"negative diagonal {diag.min():.3e} in two-body matrix")
    while True:
        p = int(np.argmax(diag)) if diag.size else 0
        if not diag.size or diag[p] <= tol:
            break
        col = m[:, p].copy()
        for u in vecs:
            col -= u * np.conj(u[p])
        u = col / np.sqrt(diag[p])
        vecs.append(u)
        diag = diag - np.abs(u) ** 2
        if diag.min() < -tol:
            raise NotPSDError(f"negative pivot {diag.min():.3e} below tolerance")
        if len(vecs) > m.shape[0]:
            raise NotPSDError("Cholesky did not terminate")
    return np.array(vecs).reshape(len(vecs), m.shape[0])


def cholesky_decompose(ham: MolecularHamiltonian, tol: float = 1e-8) -> CholeskyFactorization:
    """Pivoted Cholesky of ``M_(ik),(lj) = V_ijkl`` plus the mean-field shift."""
    n = ham.n_spin
    m = np.einsum("ijkl->iklj", ham.v).reshape(n * n, n * n)
    if np.max(np.abs(m - m.conj().T), initial=0.0) > SYMMETRY_TOL:
        raise NotPSDError("two-body matrix is not Hermitian")
    vecs = _pivoted_cholesky(m, tol).reshape(-1, n, n)
    if vecs.size and np.max(np.abs(vecs.imag)) < 1e-14:
        vecs = vecs.real
    vecs = 0.5 * (vecs + vecs.conj().transpose(0, 2, 1))
    hprime = ham.h - 0.5 * np.einsum("ikkl->il", ham.v)
    occ = np.arange(ham.n_electrons)
    mfield = np.array([np.trace(L[np.ix_(occ, occ)]) for L in vecs]).real
    v0 = hprime + np.einsum("g,gij->ij", mfield, vecs) if vecs.size else hprime.copy()
    h0_shift = ham.h0 - 0.5 * float(np.sum(mfield**2))
    return CholeskyFactorization(vecs, v0, 1j * mfield, h0_shift, tol)


# ---------------------------------------------------------------- qubit form


@dataclass
class QubitHamiltonian:
    """Pauli-term map over ``n`` qubits; words use I, X, Y, Z with qubit 0 first."""

    n: int
    terms: dict[str, complex]
    verified: bool | None = None

    def pauli_sum(self) -> PauliSum:
        out = PauliSum(self.n)
        for word, c in self.terms.items():
            p = PauliString.from_label(word)
            out.add_term(p.x, p.z, c * p.phase)
        return out

    def to_dense(self) -> np.ndarray:
        if self.n > FCI_MAX_QUBITS:
            raise ResourceError(f"dense matrix for {self.n} qubits exceeds cap")
        return self.pauli_sum().to_dense()

    def sector_matrix(self, zeta: int) -> tuple[scipy.sparse.csr_matrix, np.ndarray]:
        """Sparse restriction to Hamming weight ``zeta`` and the sector basis."""
        states = sector_states(self.n, zeta)
        lookup = -np.ones(1 << self.n, dtype=np.int64)
        lookup[states] = np.arange(states.size)
        rows, cols, vals = [], [], []
        for (x, z), c in self.pauli_sum().simplify(0.0).terms.items():
            img = states ^ x
            idx = lookup[img]
            keep = idx >= 0
            signs = 1 - 2 * (popcount(states & z) % 2)
            rows.append(idx[keep])
            cols.append(np.arange(states.size)[keep])
            vals.append(c * signs[keep])
        dim = states.size
        if not rows:
            return scipy.sparse.csr_matrix((dim, dim), dtype=complex), states
        mat = scipy.sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        ).tocsr()
        return mat, states


def sector_states(n: int, zeta: int) -> np.ndarray:
    """Basis indices of Hamming weight ``zeta`` in ascending order."""
    if not 0 <= zeta <= n:
        return np.zeros(0, dtype=np.int64)
    out = []
    for occ in combinations(range(n), zeta):
        out.append(sum(qubit_bit(n, j) for j in occ))
    return np.array(sorted(out), dtype=np.int64)


def _fermion_pauli_sum(ham: MolecularHamiltonian) -> PauliSum:
    n = ham.n_spin
    cre = [jw_creation(n, p) for p in range(n)]
    ann = [jw_annihilation(n, p) for p in range(n)]
    out = PauliSum(n, {(0, 0): ham.h0})
    for i in range(n):
        for j in range(n):
            if abs(ham.h[i, j]) > 0:
                out = out + (cre[i] * ann[j]).scale(ham.h[i, j])
    pairs_c = {}
    pairs_a = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                pairs_c[i, j] = (cre[i] * cre[j]).simplify()
                pairs_a[i, j] = (ann[i] * ann[j]).simplify()
    for (i, j), cc in pairs_c.items():
        for (l, k), aa in pairs_a.items():
            val = ham.v[i, j, k, l]
            if abs(val) > 0:
                out = out + (cc * aa).scale(0.5 * val)
    return out.simplify()


def fermion_dense(ham: MolecularHamiltonian) -> np.ndarray:
    """Dense second-quantized Hamiltonian built from explicit ladder matrices."""
    n = ham.n_spin
    if n > DENSE_VERIFY_CAP + 4:
        raise ResourceError(f"dense fermionic matrix for {n} modes exceeds cap")
    a = np.array([jw_annihilation(n, p).to_dense() for p in range(n)])
    ad = a.conj().transpose(0, 2, 1)
    dim = 1 << n
    out = ham.h0 * np.eye(dim, dtype=complex)
    out += np.einsum("ij,iab,jbc->ac", ham.h, ad, a)
    nz = np.argwhere(np.abs(ham.v) > 0)
    for i, j, k, l in nz:
        out += 0.5 * ham.v[i, j, k, l] * (ad[i] @ ad[j] @ a[l] @ a[k])
    return out


def jordan_wigner_map(ham: MolecularHamiltonian, verify_cap: int = DENSE_VERIFY_CAP) -> QubitHamiltonian:
    """Jordan-Wigner image of ``ham``; verified densely when ``n_spin <= verify_cap``."""
    terms = _fermion_pauli_sum(ham).labelled(tol=1e-14)
    # Hermitian operator: canonical coefficients are real
    terms = {w: complex(c.real) if abs(c.imag) < 1e-12 else c for w, c in terms.items()}
    qh = QubitHamiltonian(ham.n_spin, terms)
    if ham.n_spin <= verify_cap:
        err = np.max(np.abs(qh.to_dense() - fermion_dense(ham)))
        if err > 1e-10:
            raise ArithmeticError(f"Jordan-Wigner verification failed, error {err:.3e}")
        qh.verified = True
    else:
        qh.verified = False
    return qh


# ---------------------------------------------------------------- FCI


@dataclass(frozen=True)
class FciSolution:
    energy: float
    ground_vector: np.ndarray
    sector_basis: np.ndarray
    n: int
    excited: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def full_vector(self) -> np.ndarray:
        out = np.zeros(1 << self.n, dtype=complex)
        out[self.sector_basis] = self.ground_vector
        return out


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > np.max(np.abs(v)) - 1e-9))
    return v * (abs(v[k]) / v[k])


def exact_ground_state(qh: QubitHamiltonian, zeta: int, n_levels: int = 3) -> FciSolution:
    """Lowest eigenpair of ``qh`` on the Hamming-weight-``zeta`` sector."""
    if qh.n > FCI_MAX_QUBITS:
        raise ResourceError(f"{qh.n} qubits exceeds the FCI cap of {FCI_MAX_QUBITS}")
    states = sector_states(qh.n, zeta)
    if states.size == 0:
        raise ValueError(f"sector with {zeta} particles on {qh.n} qubits is empty")
    if states.size > FCI_MAX_DIM:
        raise ResourceError(f"sector dimension {states.size} exceeds cap {FCI_MAX_DIM}")
    mat, states = qh.sector_matrix(zeta)
    if states.size <= 4096:
        w, vecs = np.linalg.eigh(mat.toarray())
    else:
        k = min(n_levels, states.size - 2)
        w, vecs = scipy.sparse.linalg.eigsh(mat, k=k, which="SA")
        order = np.argsort(w)
        w, vecs = w[order], vecs[:, order]
    vec = _fix_phase(vecs[:, 0].astype(complex))
    return FciSolution(float(w[0]), vec, states, qh.n, np.asarray(w[:n_levels]))
