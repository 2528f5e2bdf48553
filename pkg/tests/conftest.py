from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import settings

from qldpc_gkp.codes import repetition_code
from qldpc_gkp.detector_model import build_circuit_check_matrix
from qldpc_gkp.schedule import greedy_schedule, serial_schedule

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def rep3():
    return repetition_code(3)


@pytest.fixture(scope="session")
def rep3_serial(rep3):
    return build_circuit_check_matrix(rep3, {"Z": serial_schedule(rep3.h_z)}, rounds=3)


@pytest.fixture(scope="session")
def rep3_greedy(rep3):
    return build_circuit_check_matrix(rep3, {"Z": greedy_schedule(rep3.h_z)}, rounds=3)


CRITERIA: dict[int, tuple[str, bool, str]] = {}


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    """Register an acceptance verdict; the terminal summary prints one line per criterion."""
    CRITERIA[number] = (title, bool(ok), detail)
    print(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        title, ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
