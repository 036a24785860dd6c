import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> list of (clause, ok, detail), filled by test_acceptance.py
_ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    def record(number: int, clause: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.setdefault(number, []).append((clause, bool(ok), detail))
        print(f"criterion {number} [{clause}]: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        clauses = _ACCEPTANCE[number]
        ok = all(c[1] for c in clauses)
        failed = "; ".join(f"{c[0]}: {c[2]}" for c in clauses if not c[1])
        tr.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}"
                      + (f" ({failed})" if failed else f" ({len(clauses)} clauses)"))
