"""Shared fixtures plus the acceptance-criteria summary hook."""

import pytest

# (number, title, passed, detail) tuples recorded by the acceptance tests.
_ACCEPTANCE_RESULTS = []


@pytest.fixture
def criterion():
    """Recorder for acceptance-criterion outcomes; one call per criterion."""
    def record(number, title, passed, detail=""):
        _ACCEPTANCE_RESULTS.append((number, title, bool(passed), detail))
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number}: {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
