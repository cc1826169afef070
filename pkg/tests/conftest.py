import contextlib
import time

import pytest

_RESULTS = {}


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.detail = ""

    def note(self, text):
        self.detail = text


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion as PASS or FAIL."""

    @contextlib.contextmanager
    def record(number, title):
        c = _Criterion(number, title)
        start = time.perf_counter()
        try:
            yield c
        except BaseException as exc:
            _RESULTS[number] = ("FAIL", title, f"{type(exc).__name__}: {exc}".splitlines()[0])
            print(f"criterion {number} FAIL: {title}")
            raise
        elapsed = time.perf_counter() - start
        _RESULTS[number] = ("PASS", title, f"{c.detail} [{elapsed:.2f}s]".strip())
        print(f"criterion {number} PASS: {title} {c.detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status, title, detail = _RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {status} - {title} ({detail})")
