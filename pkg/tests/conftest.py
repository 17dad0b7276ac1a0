from contextlib import contextmanager

import pytest

_RESULTS = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion; the body fills ``detail`` with measured values."""

    @contextmanager
    def record(number, title):
        detail = {}
        try:
            yield detail
        except BaseException:
            _RESULTS[number] = (title, False, detail)
            raise
        _RESULTS[number] = (title, True, detail)

    return record


def _fmt(value):
    return f"{value:.6g}" if isinstance(value, float) else str(value)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, ok, detail = _RESULTS[number]
        facts = ", ".join(f"{k}={_fmt(v)}" for k, v in detail.items())
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}" + (f" ({facts})" if facts else ""))
