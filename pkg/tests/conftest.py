import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from raretrans import desk
from raretrans.landscape import Landscape

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.large_base_example]
)
settings.load_profile("default")

MODELS_DIR = Path(__file__).parent.parent / "models"


@pytest.fixture
def well():
    return desk.well()


@pytest.fixture
def well_land():
    return Landscape(desk.well())


@pytest.fixture
def spur_land():
    return Landscape(desk.well_with_spur())


@pytest.fixture
def rotor():
    return desk.rotor()


@pytest.fixture
def rotor_land():
    return Landscape(desk.rotor())


@pytest.fixture
def models_dir():
    return MODELS_DIR


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
