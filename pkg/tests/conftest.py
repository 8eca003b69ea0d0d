import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_LINES: list[tuple[float, bool, str]] = []


class AcceptanceLog:
    """Collects one pass/fail line per acceptance criterion."""

    def record(self, number: float, ok: bool, detail: str) -> None:
        _ACCEPTANCE_LINES.append((number, bool(ok), detail))


@pytest.fixture(scope="session")
def acceptance_log() -> AcceptanceLog:
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE_LINES):
        label = f"{number:g}"
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {label:>2}: {status} - {detail}")
