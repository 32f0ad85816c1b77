from importlib import resources
from pathlib import Path

import pytest

from lifiloc.evaluation import load_table1
from lifiloc.model import load_floorplan

SCENARIO_DIR = Path(str(resources.files("lifiloc.data.scenarios")))


@pytest.fixture(scope="session")
def table1():
    return load_table1()


@pytest.fixture
def triangle_doc():
    return {
        "access_points": [
            {"id": "a", "x": 0.0, "y": 0.0, "p0": 26.0},
            {"id": "b", "x": 10.0, "y": 0.0, "p0": 26.0},
            {"id": "c", "x": 0.0, "y": 10.0, "p0": 26.0},
        ],
        "lamps": [{"id": "L1", "x": 5.0, "y": 5.0, "coverage_radius": 1.5}],
        "bounds": {"min_x": 0.0, "min_y": 0.0, "max_x": 10.0, "max_y": 10.0},
    }


@pytest.fixture
def triangle_plan(triangle_doc):
    return load_floorplan(triangle_doc)


@pytest.fixture(scope="session")
def scenario_dir():
    return SCENARIO_DIR


@pytest.fixture(scope="session")
def noiseless_scenario_path():
    return SCENARIO_DIR / "noiseless_single_region.json"


@pytest.fixture(scope="session")
def lab_floorplan_path():
    return SCENARIO_DIR / "lab_floorplan.json"


ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def record_criterion():
    def record(name: str, passed: bool, detail: str = "") -> bool:
        ACCEPTANCE_RESULTS.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
