import numpy as np
import pytest

from modlp.matrix import dagger, random_state, random_unitary

ACCEPTANCE_LINES = []


def rank_deficient_state(d, r, seed):
    """Random state of rank ``r`` on C^d, rotated by a Haar unitary."""
    rng = np.random.default_rng(seed)
    block = np.zeros((d, d), dtype=complex)
    block[:r, :r] = random_state(r, rng).density
    u = random_unitary(d, rng)
    return u @ block @ dagger(u)


def matrix_unit(d, i, j):
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
