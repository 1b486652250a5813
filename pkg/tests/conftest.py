import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

SIGNATURES = ["2", "3", "1,1", "1,1,1", "1,2", "2,2"]

ACCEPTANCE_LINES = []


@pytest.fixture(params=SIGNATURES)
def sig(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
