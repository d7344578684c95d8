import sys
import warnings

import pytest

from fluxsim import CircuitParams
from fluxsim.io import load_registry


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture(scope="session")
def device_a(registry):
    return registry["A"].params


@pytest.fixture
def harmonic():
    def make(E_C=0.84, E_L=1.0):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return CircuitParams(0.0, E_C, E_L)

    return make


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=int):
        passed, detail = results[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {key:>2}: {detail}")
