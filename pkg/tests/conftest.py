import numpy as np
import pytest

from magicft.codes import get_code, load_fixture


def dense_rank(rows, n_cols):
    """GF(2) rank by row reduction on a dense 0/1 array (independent of the bitset code)."""
    a = np.array([[(r >> c) & 1 for c in range(n_cols)] for r in rows], dtype=np.uint8).reshape(-1, n_cols)
    rank = 0
    for c in range(n_cols):
        piv = next((i for i in range(rank, a.shape[0]) if a[i, c]), None)
        if piv is None:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        for i in range(a.shape[0]):
            if i != rank and a[i, c]:
                a[i] ^= a[rank]
        rank += 1
    return rank


def brute_span(vectors):
    """Every XOR combination of ``vectors`` (fine for up to ~16 vectors)."""
    span = {0}
    for v in vectors:
        span |= {s ^ v for s in span}
    return span


@pytest.fixture(scope="session")
def t15():
    return get_code("t15")


@pytest.fixture(scope="session")
def ccz():
    return get_code("ccz")


@pytest.fixture(scope="session")
def table2():
    return load_fixture("t15_table2.seq")


@pytest.fixture(scope="session")
def table3():
    return load_fixture("ccz_table3.seq")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n].line())
