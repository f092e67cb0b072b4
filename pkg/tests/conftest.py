import numpy as np
import pytest

_CRITERION_LINES: list[tuple[str, str]] = []


def record_criterion(tag, label, passed, detail=""):
    """Collect one acceptance-criterion (or supporting-check) outcome for the
    terminal summary. Integer tags are spec criteria; string tags mark
    supporting cross-checks."""
    key = f"criterion {tag:02d}" if isinstance(tag, int) else f"support {tag}"
    status = "PASS" if passed else "FAIL"
    suffix = f" -- {detail}" if detail else ""
    _CRITERION_LINES.append((key, f"[{key}] {status}: {label}{suffix}"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERION_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
