"""Regenerate the molecular FCIDUMP fixtures shipped in ``qcqmc/data``.

Requires pyscf, which is not a runtime dependency of the package.  Run once;
the outputs are committed.

    python scripts/make_fixtures.py
"""
from pathlib import Path

from pyscf import ao2mo, fci, gto, scf
from pyscf.tools import fcidump

OUT = Path(__file__).resolve().parents[1] / "src" / "qcqmc" / "data"


def h2(bond: float) -> None:
    mol = gto.M(atom=f"H 0 0 0; H 0 0 {bond}", basis="sto-3g", unit="Angstrom")
    mf = scf.RHF(mol).run(conv_tol=1e-12)
    label = f"h2_sto3g_{bond:.2f}"
    fcidump.from_scf(mf, str(OUT / f"{label}.fcidump"), tol=1e-15)
    e_fci = fci.FCI(mf).kernel()[0]
    print(label, "E_HF", mf.e_tot, "E_FCI", e_fci)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for d in (0.75, 1.25, 1.75, 2.25, 2.75):
        h2(d)
