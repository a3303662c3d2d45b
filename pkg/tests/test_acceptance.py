"""Acceptance gate: one test per criterion, one printed line per check.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the summary
section) or add ``-s`` to see them inline.
"""

import pytest

from spacsim.verification import CRITERIA

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("criterion", sorted(CRITERIA), ids=lambda k: f"criterion-{k}")
def test_criterion(criterion):
    checks = CRITERIA[criterion]()
    assert checks
    for c in checks:
        line = f"[{c.status}] criterion {c.criterion}: {c.name} -- {c.detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    failed = [c for c in checks if c.asserted and not c.passed]
    assert not failed, "; ".join(f"{c.name}: {c.detail}" for c in failed)
