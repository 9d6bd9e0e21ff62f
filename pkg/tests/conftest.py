import pytest
from hypothesis import HealthCheck, settings

from starkbragg.config import load_preset

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES: dict = {}


@pytest.fixture(scope="session")
def er_preset():
    return load_preset("er_yag")


@pytest.fixture(scope="session")
def er_system(er_preset):
    return er_preset.system(False)


@pytest.fixture(scope="session")
def er_override_system(er_preset):
    return er_preset.system(True)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
