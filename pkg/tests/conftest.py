import numpy as np
import pytest

from timespace import spacetime


@pytest.fixture(scope="session")
def minkowski():
    return spacetime.load_spec(spacetime.fixture_path("minkowski.toml"))


@pytest.fixture(scope="session")
def schwarzschild():
    return spacetime.load_spec(spacetime.fixture_path("schwarzschild.toml"))


@pytest.fixture(scope="session")
def cone():
    return spacetime.load_spec(spacetime.fixture_path("cone_cylinder.toml"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts at the end of the run."""
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
