from fractions import Fraction

import numpy as np
import pytest

from conftest import random_member, random_signed_graph
from signed_nullity.enumeration import EnumerationSpec, enumerate_graphs
from signed_nullity.graph import SignedGraph, diagonal_signs, resign
from signed_nullity.matrix import (
    MatrixError,
    dump_matrix,
    exact_membership,
    exact_nullity,
    exact_rank,
    fixture_matrix,
    fixture_names,
    load_matrix,
    max_nullity_search,
    nullity,
    parse_matrix,
    sap_check,
    validate_membership,
    xi_search,
)
from signed_nullity.minors import FORBIDDEN, WEAK, MinorTable, pattern


def J(n):
    return np.ones((n, n))


# -- membership and nullity ---------------------------------------------------------------------------

def test_membership_examples():
    assert validate_membership(-J(3), pattern("K3e"))
    assert validate_membership(np.zeros((2, 2)), pattern("K2eq"))
    assert not validate_membership(np.array([[0.0, 1.0], [1.0, 0.0]]), SignedGraph(2, [(1, 2, 0)]))
    # non-adjacent pairs must be zero
    path = SignedGraph(3, [(1, 2, 0), (2, 3, 0)])
    a = -J(3)
    assert not validate_membership(a, path)
    a[0, 2] = a[2, 0] = 0.0
    assert validate_membership(a, path)


def test_membership_errors():
    with pytest.raises(MatrixError):
        validate_membership(-J(3), pattern("K4e"))
    with pytest.raises(MatrixError):
        validate_membership(np.array([[0.0, -1.0], [-2.0, 0.0]]), SignedGraph(2, [(1, 2, 0)]))


def test_nullity_examples():
    for n in range(2, 7):
        assert nullity(-J(n)).nullity == n - 1
    assert nullity(np.diag([1.0, 2.0, 3.0])).nullity == 0
    assert nullity(np.zeros((3, 3))).nullity == 3


def test_kernel_basis_is_orthonormal_with_small_residuals():
    cert = nullity(-J(5))
    z = cert.kernel_basis
    assert np.allclose(z.T @ z, np.eye(4))
    assert cert.residuals <= 1e-9 * np.linalg.norm(-J(5), 2)


# -- Strong Arnold Property ---------------------------------------------------------------------------

def test_sap_examples():
    for n in range(2, 7):
        assert sap_check(-J(n), pattern(f"K{n}e")).dimension == 0
    assert sap_check(np.zeros((2, 2)), pattern("K2eq")).holds
    two = SignedGraph(4, [(1, 2, 0), (1, 2, 1), (3, 4, 0), (3, 4, 1)])
    rep = sap_check(np.zeros((4, 4)), two)
    assert rep.dimension == 4 and not rep.holds
    for x in rep.basis:
        assert np.allclose(x, x.T) and np.allclose(np.diag(x), 0)
        assert x[0, 1] == 0 and x[2, 3] == 0


def test_sap_rejects_non_members():
    with pytest.raises(MatrixError):
        sap_check(J(3), pattern("K3e"))


def exact_sap_dimension(rows, g):
    """Free symmetric X on non-adjacent pairs with AX = 0, counted over the rationals."""
    n = g.n
    adjacent = set(g.pair_counts())
    free = [(i, j) for i in range(n) for j in range(i + 1, n) if (i + 1, j + 1) not in adjacent]
    if not free:
        return 0
    columns = []
    for i, j in free:
        # A X with X = E_ij + E_ji: column j gets A[:, i], column i gets A[:, j]
        prod = [[Fraction(0)] * n for _ in range(n)]
        for r in range(n):
            prod[r][j] += rows[r][i]
            prod[r][i] += rows[r][j]
        columns.append([x for row in prod for x in row])
    return len(free) - exact_rank(columns)


@pytest.mark.parametrize("name", fixture_names())
def test_sap_dimension_matches_exact_count(name):
    fx = fixture_matrix(name)
    assert sap_check(fx.a, fx.graph).dimension == exact_sap_dimension(fx.exact, fx.graph)


def test_sap_exact_count_on_disjoint_digons():
    two = SignedGraph(4, [(1, 2, 0), (1, 2, 1), (3, 4, 0), (3, 4, 1)])
    zero = [[Fraction(0)] * 4 for _ in range(4)]
    assert exact_sap_dimension(zero, two) == 4


# -- diagonal similarity ------------------------------------------------------------------------------

def test_diagonal_similarity_covariance():
    rng = np.random.default_rng(21)
    for _ in range(200):
        g = random_signed_graph(rng, 2, 6, 10)
        u = {v for v in g.vertices if rng.random() < 0.5}
        a = random_member(g, rng)
        d = np.diag(diagonal_signs(g.n, u))
        b = d @ a @ d
        h = resign(g, u)
        assert validate_membership(b, h) == validate_membership(a, g)
        assert nullity(b).nullity == nullity(a).nullity
        if validate_membership(a, g):
            assert sap_check(b, h).dimension == sap_check(a, g).dimension


# -- search -------------------------------------------------------------------------------------------

def test_search_finds_k23e_nullity_3():
    cert = max_nullity_search(pattern("K23e"), 3, budget=1000, seed=0)
    assert cert is not None and cert.nullity >= 3
    assert validate_membership(cert.matrix.a, pattern("K23e"))
    assert cert.residuals <= 1e-9 * np.linalg.norm(cert.matrix.a, 2)


def test_search_exhausts_on_a_path():
    p4 = SignedGraph(4, [(1, 2, 0), (2, 3, 0), (3, 4, 0)])
    assert max_nullity_search(p4, 2, budget=500, seed=0) is None
    assert max_nullity_search(p4, 1, budget=100, seed=0) is not None


def test_xi_search_examples():
    cert, sap = xi_search(pattern("K3eq"), 3, budget=10, seed=0)
    assert cert.restart == 0 and np.all(cert.matrix.a == 0) and sap.holds
    cert, sap = xi_search(pattern("K2eq"), 2, budget=10, seed=0)
    assert np.all(cert.matrix.a == 0) and sap.holds
    cert, sap = xi_search(pattern("K4e"), 3, budget=1000, seed=0)
    assert sap.dimension == 0 and cert.nullity >= 3


def test_search_is_deterministic():
    a = max_nullity_search(pattern("K4o"), 3, budget=400, seed=3)
    b = max_nullity_search(pattern("K4o"), 3, budget=400, seed=3)
    assert a is not None and a.restart == b.restart
    assert np.array_equal(a.matrix.a, b.matrix.a)


def test_xi_at_most_m_on_small_hosts():
    rng = np.random.default_rng(22)
    graphs = list(enumerate_graphs(EnumerationSpec(n_max=4)))
    for i in rng.choice(len(graphs), 12, replace=False):
        g = graphs[int(i)]
        for k in (2, 3):
            if xi_search(g, k, budget=200, seed=1) is not None:
                assert max_nullity_search(g, k, budget=200, seed=1) is not None


def test_hosts_with_forbidden_minors_reach_xi_3():
    """Minor monotonicity spot check: a host with a weak forbidden minor has xi >= 3."""
    table = MinorTable(FORBIDDEN, WEAK)
    rng = np.random.default_rng(23)
    graphs = [g for g in enumerate_graphs(EnumerationSpec(n_max=4, n_min=3)) if table.mask(g)]
    for i in rng.choice(len(graphs), 6, replace=False):
        g = graphs[int(i)]
        assert xi_search(g, 3, budget=2000, seed=0) is not None, g


# -- exact fixtures -----------------------------------------------------------------------------------

def test_fixture_examples():
    fx = fixture_matrix("K5e")
    assert np.array_equal(fx.a, -J(5)) and exact_nullity(fx.exact) == 4
    assert np.all(fixture_matrix("K3eq").a == 0) and exact_nullity(fixture_matrix("K3eq").exact) == 3
    assert exact_rank(fixture_matrix("K23e").exact) == 2
    with pytest.raises(KeyError):
        fixture_matrix("Petersen")


@pytest.mark.parametrize("name", fixture_names())
def test_every_fixture_is_an_exact_member(name):
    fx = fixture_matrix(name)
    assert exact_membership(fx.exact, fx.graph)
    assert validate_membership(fx.a, fx.graph)
    assert nullity(fx.a).nullity == exact_nullity(fx.exact)


def test_fixtures_with_sap_where_expected():
    for name in ("K4e", "K4o", "K3eq", "K2eq", "W4o", "K4i"):
        fx = fixture_matrix(name)
        assert sap_check(fx.a, fx.graph).holds, name


def test_strict_minor_reading_of_the_characterisation_fails():
    """K4 minus one edge with two mixed pairs has no strict forbidden minor, yet nullity 3 is attained."""
    g = SignedGraph(4, [(1, 2, 0), (1, 3, 0), (1, 4, 0), (1, 4, 1), (2, 3, 0), (3, 4, 0), (3, 4, 1)])
    rows = [[Fraction(-1) if i < 3 and j < 3 else Fraction(0) for j in range(4)] for i in range(4)]
    assert exact_membership(rows, g)
    assert exact_nullity(rows) == 3


def test_exact_rank_against_floating_point():
    rng = np.random.default_rng(24)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        r = int(rng.integers(0, n + 1))
        a = rng.integers(-3, 4, size=(n, r)) @ rng.integers(-3, 4, size=(r, n))
        assert exact_rank(a.tolist()) == np.linalg.matrix_rank(a.astype(float))
    assert exact_rank([[Fraction(1, 2), Fraction(1, 3)], [Fraction(3, 2), Fraction(1)]]) == 1


def test_matrix_io_round_trip(tmp_path):
    rows = fixture_matrix("K23i").exact
    path = tmp_path / "a.json"
    dump_matrix(rows, path)
    arr, exact = load_matrix(path)
    assert exact == rows
    assert np.allclose(arr, fixture_matrix("K23i").a)
    arr, exact = parse_matrix([[0.5, 1], [1, 2]])
    assert exact is None and arr[0, 0] == 0.5
