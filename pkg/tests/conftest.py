import numpy as np
import pytest

from corrcusum import kernels
from corrcusum._backend import NUMBA_AVAILABLE
from corrcusum.limit import simulate_sup_l1_bridges

BACKENDS = ["numba", "numpy"] if NUMBA_AVAILABLE else ["numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per kernel backend."""
    monkeypatch.setattr(kernels, "USE_NUMBA", request.param == "numba")
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture(scope="session")
def table_d1():
    return simulate_sup_l1_bridges(1, grid_n=1000, paths=100_000, seed=11)


@pytest.fixture(scope="session")
def table_d6():
    return simulate_sup_l1_bridges(6, grid_n=1000, paths=100_000, seed=11)


@pytest.fixture(scope="session")
def small_table_d1():
    return simulate_sup_l1_bridges(1, grid_n=200, paths=5_000, seed=3)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
