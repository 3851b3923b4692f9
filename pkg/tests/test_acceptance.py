"""One test per acceptance criterion, each at its stated tolerance.

Every criterion prints a single PASS/FAIL line (also collected into the
terminal summary).  Run this file directly to get just those lines.
"""

import pytest

from zetamoments import verify

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []


@pytest.mark.parametrize("cid", sorted(verify.REGISTRY))
def test_criterion(cid):
    result = verify.run_one(cid)
    print(result.line)
    ACCEPTANCE_LINES.append(result.line)
    assert result.passed, result.line


if __name__ == "__main__":
    for cid in sorted(verify.REGISTRY):
        print(verify.run_one(cid).line, flush=True)
