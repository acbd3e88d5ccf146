import numpy as np
import pytest

from blanch_bench.fem import (
    FingerSectionGeometry,
    IndenterSpec,
    MaterialTable,
    build_finger_mesh,
    solve_indentation,
)


@pytest.fixture(scope="session")
def coarse_flat_mesh():
    return build_finger_mesh(FingerSectionGeometry(ridges_enabled=False), 0.4, 0.2)


@pytest.fixture(scope="session")
def coarse_ridged_mesh():
    return build_finger_mesh(FingerSectionGeometry(), 0.4, 0.1)


@pytest.fixture(scope="session")
def default_materials():
    return MaterialTable()


@pytest.fixture(scope="session")
def coarse_solution(coarse_ridged_mesh, default_materials):
    """d = 3 mm, h = 1 mm on the coarse ridged mesh."""
    ind = IndenterSpec(3.0, 1.0)
    return ind, solve_indentation(coarse_ridged_mesh, default_materials, ind)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion; the summary prints one line per criterion."""

    def record(number, title, passed, detail=""):
        _ACCEPTANCE[number] = (title, bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:2d}. {title}: {detail}")
