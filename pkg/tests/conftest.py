import os

# a real multi-thread pool even on single-core machines, so thread-count
# invariance is exercised; must be set before numba is imported
os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import warnings  # noqa: E402

import numpy as np  # noqa: E402
import pytest  # noqa: E402

warnings.filterwarnings("ignore", message=".*TBB.*")

from shapevis.types import symmetric_csr  # noqa: E402

ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        for key, val in report.user_properties:
            if key == "criterion":
                crit = val
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = ACCEPTANCE.get(crit)
        if prev is None or prev[0] == "PASS":
            ACCEPTANCE[crit] = ("PASS" if report.passed else "FAIL", report.nodeid.split("::")[-1])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        status, name = ACCEPTANCE[crit]
        terminalreporter.write_line(f"criterion {crit:>2}: {status}  ({name})")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def weighted_graph(edges, n=None):
    """Symmetric CSR from ``[(u, v, w), ...]`` or ``[(u, v), ...]`` (unit weight)."""
    edges = list(edges)
    if n is None:
        n = 1 + max(max(e[0], e[1]) for e in edges)
    u = [e[0] for e in edges]
    v = [e[1] for e in edges]
    w = [e[2] if len(e) > 2 else 1.0 for e in edges]
    return symmetric_csr(u, v, w, n)


def random_weighted_graph(rng, n, p, low=0.1, high=1.0):
    mask = np.triu(rng.random((n, n)) < p, k=1)
    u, v = np.nonzero(mask)
    return symmetric_csr(u, v, rng.uniform(low, high, len(u)), n)
