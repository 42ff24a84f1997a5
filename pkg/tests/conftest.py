import numpy as np
import pytest

from nswiener import IndexWindow
from nswiener.sampling import random_operator

_criteria = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def record():
    """Record one acceptance line; printed in the terminal summary."""
    def _record(name, ok, detail=""):
        _criteria.append((name, ok, detail))
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def random_banded(rng, m=None, lo=None, length=None, offsets=None):
    m = int(rng.integers(1, 4)) if m is None else m
    length = int(rng.integers(3, 16)) if length is None else length
    lo = int(rng.integers(-5, 5)) if lo is None else lo
    if offsets is None:
        a = int(rng.integers(-3, 1))
        offsets = range(a, a + int(rng.integers(1, 8)))
    return random_operator(rng, m, IndexWindow(lo, lo + length - 1), offsets)


def brute_dense(F, window):
    """Dense block matrix built entry by entry from get_entry."""
    from nswiener import get_entry
    L, m = len(window), F.m
    A = np.zeros((L * m, L * m), dtype=complex)
    for r, i in enumerate(window):
        for c, j in enumerate(window):
            A[r * m:(r + 1) * m, c * m:(c + 1) * m] = get_entry(F, i, j)
    return A
