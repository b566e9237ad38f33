import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """``record(tag, passed, detail)`` adds one line to the acceptance summary."""

    def record(tag: str, passed: bool, detail: str) -> bool:
        _ACCEPTANCE.append(f"[{'PASS' if passed else 'FAIL'}] {tag}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
