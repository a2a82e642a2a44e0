import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from huffcs.model import WORKED_EXAMPLE_TABLE, worked_example_model  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def worked():
    return worked_example_model()


@pytest.fixture
def worked_table():
    return {frozenset(k): v for k, v in WORKED_EXAMPLE_TABLE.items()}


@pytest.fixture
def configs():
    return CONFIGS


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
