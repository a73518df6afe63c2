import math

import pytest

from epifield.config import load_preset
from epifield.mapping import PlaneParam
from epifield.scene import SceneDef, SurfaceSpec, TextureSpec


@pytest.fixture(scope="session")
def scene_a():
    return load_preset("A")


@pytest.fixture(scope="session")
def scene_b():
    return load_preset("B")


@pytest.fixture(scope="session")
def scene_c():
    return load_preset("C")


@pytest.fixture(scope="session")
def flat_scene():
    # extent wide enough that the default capture window never sees past it
    return SceneDef(SurfaceSpec(1.5, 0.0, 0.0, (-3.0, 3.0)), TextureSpec(), "flat")


@pytest.fixture(scope="session")
def directional():
    return PlaneParam(1.0, math.inf, 0.0)


# One line per acceptance criterion, printed after the test summary so the
# verdicts stay visible without -s.
_criterion_lines: list[str] = []


@pytest.fixture(scope="session")
def criterion_report():
    return _criterion_lines


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)
