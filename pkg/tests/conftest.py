import os

import pytest

from zetamoments.arith import CACHE_ENV

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session", autouse=True)
def sieve_cache(tmp_path_factory):
    """Share sieved tables between tests through a throwaway cache dir."""
    old = os.environ.get(CACHE_ENV)
    path = tmp_path_factory.mktemp("sieve-cache")
    os.environ[CACHE_ENV] = str(path)
    yield path
    if old is None:
        os.environ.pop(CACHE_ENV, None)
    else:
        os.environ[CACHE_ENV] = old


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
