"""Shared pytest plumbing.

The end-to-end suite (test_acceptance.py) prints one verdict line per
claim; default capture would swallow those for passing tests, so they are
also collected here and echoed after the run as a checklist.
"""

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log() -> list[str]:
    """Registry the verdict lines go into; echoed by the summary hook."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance checklist")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
