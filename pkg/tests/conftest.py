import math

import numpy as np
import pytest


def taylor_expm(x: np.ndarray, terms: int = 60) -> np.ndarray:
    """Truncated power series of exp(x); independent of any eigensolver."""
    out = np.eye(x.shape[0], dtype=complex)
    term = np.eye(x.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ x / k
        out = out + term
    return out


def taylor_sin(x: np.ndarray, terms: int = 40) -> np.ndarray:
    out = np.zeros_like(x, dtype=complex)
    for k in range(terms):
        out = out + (-1) ** k * np.linalg.matrix_power(x, 2 * k + 1) / math.factorial(2 * k + 1)
    return out


def taylor_sinh(x: np.ndarray, terms: int = 40) -> np.ndarray:
    out = np.zeros_like(x, dtype=complex)
    for k in range(terms):
        out = out + np.linalg.matrix_power(x, 2 * k + 1) / math.factorial(2 * k + 1)
    return out


def random_matrix(rng, dim, scale=1.0):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * m / np.linalg.norm(m, 2)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20210623)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
