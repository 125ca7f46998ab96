import numpy as np
import pytest
from scipy.stats import unitary_group

from extremal.tuples import OperatorTuple

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_unitary(rng, d):
    return np.atleast_2d(unitary_group.rvs(d, random_state=rng)) if d > 1 else np.exp(
        2j * np.pi * rng.uniform()
    ) * np.ones((1, 1))


def random_commuting_tuple(rng, n, d, normal=False):
    """Commuting tuple: polynomials in one random matrix (or simultaneously
    diagonalised normals), each scaled to have norm in (0, 1]."""
    if normal:
        q = random_unitary(rng, d)
        ops = [q @ np.diag(random_complex(rng, d)) @ q.conj().T for _ in range(n)]
    else:
        base = random_complex(rng, d, d)
        ops = []
        for _ in range(n):
            c = random_complex(rng, 3)
            ops.append(c[0] * np.eye(d) + c[1] * base + c[2] * base @ base)
    return [m / np.linalg.norm(m, 2) for m in ops]


def as_tuple(ops):
    return OperatorTuple(tuple(ops))
