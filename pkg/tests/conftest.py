import numpy as np
import pytest

from quadbt.lti import StateSpaceSystem


@pytest.fixture
def s1():
    """(s + 2)/(s + 1): square, minimum phase, strictly positive real."""
    return StateSpaceSystem(-1.0, 1.0, 1.0, 1.0)


@pytest.fixture
def s2():
    """0.5/(s + 1): strictly bounded real with zero feedthrough."""
    return StateSpaceSystem(-1.0, 1.0, 0.5, 0.0)


@pytest.fixture
def lag():
    return StateSpaceSystem(-1.0, 1.0, 1.0, 0.0)


def random_stable(n, m, p, seed, shift=0.5):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n)) / np.sqrt(n)
    A = X - (np.max(np.linalg.eigvals(X).real) + shift) * np.eye(n)
    return StateSpaceSystem(A, rng.standard_normal((n, m)), rng.standard_normal((p, n)),
                            0.3 * rng.standard_normal((p, m)))


def random_points(seed, k=10):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(k) + 1j * rng.standard_normal(k) * 3


def well_conditioned(n, seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q @ np.diag(rng.uniform(0.5, 2.0, n))


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
