from pathlib import Path

import pytest

from kkdirac.geometry import assemble_kk, flat_spacetime, random_polynomial_potential, sphere_model, zero_potential

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
SCHEMA = ROOT / "schemas" / "report-1.0.schema.json"


@pytest.fixture(scope="session")
def spacetime():
    return flat_spacetime()


@pytest.fixture(scope="session")
def sphere():
    return sphere_model()


@pytest.fixture(scope="session")
def geom42(spacetime, sphere):
    return assemble_kk(spacetime, sphere, random_polynomial_potential(spacetime.chart, 42))


@pytest.fixture(scope="session")
def geom0(spacetime, sphere):
    return assemble_kk(spacetime, sphere, zero_potential(spacetime.chart))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
