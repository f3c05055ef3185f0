import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record ``(label, passed, detail)`` for the end-of-run criteria summary."""
    log = request.config.stash.setdefault(_VERDICTS, [])

    def record(label, passed, detail=""):
        log.append((label, bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_VERDICTS, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(log, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {label}: {'PASS' if passed else 'FAIL'}  {detail}")
