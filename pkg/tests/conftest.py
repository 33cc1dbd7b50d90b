import os

import pytest

_CRITERIA: list[str] = []
_CENSUS: dict = {}


@pytest.fixture
def criterion():
    """Record a one-line acceptance verdict, printed in the terminal summary."""

    def record(n, ok, detail=""):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _CRITERIA.append(line)
        return ok

    return record


@pytest.fixture(scope="session")
def census_cache():
    """(s label, N) -> (rows, archives), so several criteria share one run."""
    from spinbethe.census import RunConfig, run_census

    def get(s, N):
        key = (str(s), N)
        if key not in _CENSUS:
            _CENSUS[key] = run_census(RunConfig(s, (N, N)))
        return _CENSUS[key]

    return get


def extended_enabled() -> bool:
    return os.environ.get("SPINBETHE_EXTENDED", "") not in ("", "0")


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
