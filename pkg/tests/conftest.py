import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tfedno.disc_algebra import ProductWorkspace
from tfedno.poisson import build_plan

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_plan():
    return build_plan(6, 10, 8, 0.8)


@pytest.fixture(scope="session")
def small_ws():
    return ProductWorkspace(6, 10)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_coeffs(rng, M, N, decay=0.0):
    c = rng.standard_normal((2 * M + 1, N + 1)) + 1j * rng.standard_normal((2 * M + 1, N + 1))
    return c * np.exp(-decay * np.arange(N + 1))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
