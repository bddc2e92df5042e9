from pathlib import Path

import pytest

from ensemble_su2.profile import BumpParams, TargetProfile

DATA = Path(__file__).parent / "data"

BP = BumpParams(0.4, 0.5, 1.0, 1.1)


@pytest.fixture(scope="session")
def bump():
    return BP


@pytest.fixture(scope="session")
def half_pi():
    return TargetProfile(BP, "pi/2")


@pytest.fixture(scope="session")
def sixth():
    return TargetProfile(BP, "pi/(6*omega)")


@pytest.fixture(scope="session")
def zero_profile():
    return TargetProfile(BP, "0")


@pytest.fixture
def data_dir():
    return DATA


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion_report():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
