import numpy as np
import pytest

from sdg.game import embed_polymatrix

MATCHING_PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def pennies():
    return embed_polymatrix([2, 2], [(0, 1, MATCHING_PENNIES, -MATCHING_PENNIES.T)])


def loop_apply_choi(choi, a, dim_in, dim_out):
    """Phi(a) = sum_ij a[i, j] Phi(E_ij), reading Phi(E_ij) off the (i, j) sub-blocks of J."""
    out = np.zeros((dim_out, dim_out), dtype=complex)
    for i in range(dim_in):
        for j in range(dim_in):
            block = choi[i::dim_in, j::dim_in]
            out += a[i, j] * block
    return out


def loop_partial_trace_first(m, da, db):
    out = np.zeros((db, db), dtype=complex)
    for k in range(da):
        out += m[k * db:(k + 1) * db, k * db:(k + 1) * db]
    return out


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
