import logging
from pathlib import Path

import pytest

CORPUS = Path(__file__).resolve().parents[1] / "src" / "archsubst" / "corpus"

# lines printed by the acceptance module, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def corpus():
    return CORPUS


@pytest.fixture(autouse=True)
def _quiet_mismatch_warnings():
    logging.getLogger("archsubst").setLevel(logging.ERROR)
    yield
    logging.getLogger("archsubst").setLevel(logging.NOTSET)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
