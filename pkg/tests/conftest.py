import contextlib
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from helpers import load_kb  # noqa: E402

_RESULTS = {}


class Criterion:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.notes = []

    def note(self, text):
        self.notes.append(str(text))


@contextlib.contextmanager
def _run(number, title):
    c = Criterion(number, title)
    try:
        yield c
    except BaseException as e:
        c.note(f"{type(e).__name__}: {str(e).splitlines()[0] if str(e) else ''}")
        _RESULTS[number] = ("FAIL", c)
        raise
    _RESULTS[number] = ("PASS", c)


@pytest.fixture
def criterion():
    """``with criterion(3, "title") as c:`` records one pass/fail line for the acceptance summary."""
    return _run


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        verdict, c = _RESULTS[n]
        detail = "; ".join(c.notes)
        terminalreporter.write_line(f"criterion {n}: {verdict} {c.title}" + (f" ({detail})" if detail else ""))


@pytest.fixture(scope="session")
def friends_kb():
    return load_kb("friends.ndkb")


@pytest.fixture(scope="session")
def compete_kb():
    return load_kb("compete.ndkb")


@pytest.fixture(scope="session")
def beach_kb():
    return load_kb("beach.ndkb")
