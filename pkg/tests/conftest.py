import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rrdps.keyrate import ProtocolParams  # noqa: E402
from rrdps.model import LinkParams  # noqa: E402

EXPERIMENT_MU = {20: 0.06, 50: 0.05, 70: 0.045, 80: 0.04, 85: 0.04, 90: 0.04}


@pytest.fixture
def protocol():
    return ProtocolParams()


@pytest.fixture
def link():
    return LinkParams()


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    verdicts = getattr(acceptance, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in verdicts:
            terminalreporter.write_line(line)
