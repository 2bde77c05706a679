import math

import numpy as np
import pytest

from collisionmodel.model import ModelParams

HALF_PI = math.pi / 2

_ACCEPTANCE_LINES = []


def random_unitary(rng, dim):
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density_matrix(rng, k):
    """Random unitary applied to a random diagonal mixture."""
    dim = 2 ** k
    p = rng.dirichlet(np.ones(dim))
    u = random_unitary(rng, dim)
    return u @ np.diag(p) @ u.conj().T


def random_hermitian(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2


def default_params(**kw):
    base = dict(T_S=0.1, T_E=1.0, omega_S=1.0, omega_E=1.0, nu=0.05 * HALF_PI,
                epsilon=0.95 * HALF_PI, n_collisions=2000, strategy="strategy2")
    base.update(kw)
    return ModelParams(**base)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
