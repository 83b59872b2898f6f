import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            name = getattr(rep, "nodeid", "").split("::")[-1]
            if not name.startswith("test_criterion_") or (rep.when != "call" and outcome == "passed"):
                continue
            detail = dict(getattr(rep, "user_properties", [])).get("detail", "")
            rows.append((name, "PASS" if outcome == "passed" else "FAIL", detail))
    if rows:
        terminalreporter.section("acceptance criteria")
        for name, status, detail in sorted(rows):
            num = int(name.split("_")[2])
            terminalreporter.write_line(f"criterion {num:2d} {status}: {detail}")
