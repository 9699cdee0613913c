import numpy as np
import pytest

from qjaynes.channels import SIGMA_MINUS, SIGMA_X, SIGMA_Y, SIGMA_Z, canonical_examples

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def examples():
    return canonical_examples()


@pytest.fixture
def paulis():
    return {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z, "minus": SIGMA_MINUS}


def fro(a, b=None):
    a = np.asarray(a)
    return float(np.linalg.norm(a if b is None else a - np.asarray(b)))
