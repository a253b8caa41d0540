import numpy as np
import pytest

from signed_nullity.enumeration import EnumerationSpec
from signed_nullity.graph import SignedGraph, is_two_connected
from signed_nullity.harness import lemma_checks, verify_theorem
from signed_nullity.matrix import FREE, NEG, POS, pattern_codes
from signed_nullity.structure import PartialWideTable

# criterion number -> (passed, detail); filled by test_acceptance, printed at the end of the run
ACCEPTANCE = {}


def record(number: int, passed: bool, detail: str):
    ACCEPTANCE[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def theorem_report():
    return verify_theorem(EnumerationSpec())


@pytest.fixture(scope="session")
def all_graphs(theorem_report):
    return [r.graph for r in theorem_report.rows]


@pytest.fixture(scope="session")
def lemma_results(all_graphs):
    return lemma_checks(all_graphs)


@pytest.fixture(scope="session")
def wide_table():
    return PartialWideTable()


def random_signed_graph(rng, n_min=2, n_max=6, max_edges=10, two_connected=False):
    """Random signed multigraph; with ``two_connected`` retried until it is."""
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
        m = int(rng.integers(1, max_edges + 1))
        edges = []
        for _ in range(m):
            u, v = pairs[int(rng.integers(len(pairs)))]
            edges.append((u, v, int(rng.integers(2))))
        g = SignedGraph(n, edges)
        if not two_connected or is_two_connected(g):
            return g


def random_member(g, rng):
    """Random matrix of S(g) with nullity at least one (diagonal shifted by an eigenvalue)."""
    codes = pattern_codes(g)
    mags = rng.uniform(0.5, 2.0, size=codes.shape)
    mags = np.triu(mags, 1)
    mags = mags + mags.T
    a = np.where(codes == NEG, -mags, 0.0) + np.where(codes == POS, mags, 0.0)
    a += np.where((codes == FREE) & ~np.eye(g.n, dtype=bool), rng.uniform(-2, 2) * mags, 0.0)
    a = (a + a.T) / 2
    a += np.diag(rng.uniform(-2, 2, g.n))
    lam = np.linalg.eigvalsh(a)[int(rng.integers(g.n))]
    return a - lam * np.eye(g.n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
