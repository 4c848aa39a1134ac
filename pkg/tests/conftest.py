import numpy as np
import pytest

_ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    """Record one acceptance criterion; a summary line per criterion is printed at the end."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        print(line)
        _ACCEPTANCE.append((number, title, passed, detail))
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(
            f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {title}" + (f" ({detail})" if detail else ""))
