import itertools

import numpy as np
import pytest


def brute_svp(B, R):
    """Shortest nonzero vector norm^2 and minimizers over the box |x_i| <= R."""
    B = np.array(B, dtype=np.int64)
    best, mins = None, []
    for x in itertools.product(range(-R, R + 1), repeat=len(B)):
        if not any(x):
            continue
        v = np.array(x) @ B
        n = int(v @ v)
        if best is None or n < best:
            best, mins = n, [x]
        elif n == best:
            mins.append(x)
    return best, sorted(mins)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = []


@pytest.fixture
def verdict():
    """Record a one-line PASS/FAIL verdict; every line is repeated in the session summary."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
