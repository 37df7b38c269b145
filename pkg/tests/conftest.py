import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_nondominated(objs):
    """All-pairs scan, written independently of monobo.core."""
    keep = []
    for i, a in enumerate(objs):
        dominated = False
        for j, b in enumerate(objs):
            if i != j and all(b[k] <= a[k] for k in range(len(a))) and any(b[k] < a[k] for k in range(len(a))):
                dominated = True
                break
        if not dominated:
            keep.append(i)
    return keep


ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
