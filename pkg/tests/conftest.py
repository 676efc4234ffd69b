import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qtunnel import PotentialSpec, build_quantum_potential, default_grid, harmonic, solve_spectrum


def _table(potential, n_levels=20):
    spec = solve_spectrum(potential, default_grid(potential), n_levels)
    return build_quantum_potential(spec)


@pytest.fixture(scope="session")
def dw32():
    """Quantum-potential table of the lambda = 1/32 double well."""
    return _table(PotentialSpec.symmetric(1 / 32))


@pytest.fixture(scope="session")
def dw8():
    return _table(PotentialSpec.symmetric(1 / 8))


@pytest.fixture(scope="session")
def dw02():
    return _table(PotentialSpec.symmetric(0.2))


@pytest.fixture(scope="session")
def asym():
    return _table(PotentialSpec.asymmetric())


@pytest.fixture(scope="session")
def ho():
    return _table(harmonic())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if not mod or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
