import json
from pathlib import Path

import numpy as np
import pytest

from qcqmc.hamiltonian import cholesky_decompose, exact_ground_state, fixture_path, jordan_wigner_map, load_fcidump

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def h2():
    return load_fcidump(fixture_path("h2_sto3g_0.75.fcidump"))


@pytest.fixture(scope="session")
def h2_chol(h2):
    return cholesky_decompose(h2)


@pytest.fixture(scope="session")
def h2_fci(h2):
    return exact_ground_state(jordan_wigner_map(h2), 2)


@pytest.fixture(scope="session")
def golden():
    return json.loads((DATA / "golden_fci_pyscf.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
