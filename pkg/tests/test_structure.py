import itertools

import networkx as nx
import numpy as np
import pytest

from signed_nullity.enumeration import EnumerationSpec, enumerate_graphs
from signed_nullity.graph import (
    EVEN,
    ODD,
    GraphError,
    SignedGraph,
    canonical_key,
    is_two_connected,
    resign,
)
from signed_nullity.minors import k4i, pattern, w4o
from signed_nullity.structure import (
    PartialWideTable,
    Step,
    TraceError,
    Wide2PathTrace,
    check_completion,
    check_wide_separation,
    find_split_pairs,
    find_wide_separation,
    is_partial_2_path,
    is_partial_wide_2_path,
    is_w4o_class,
    iter_wide_separations,
    maximal_wide_2_paths,
    random_wide_2_path,
    recognize_wide_2_path,
    validate_trace,
)


def simple(n, pairs):
    return SignedGraph(n, [(u, v, EVEN) for u, v in pairs])


# -- wide separations ---------------------------------------------------------------------------------

def test_k4i_wide_separation():
    g = k4i()   # odd edge 12
    seps = list(iter_wide_separations(g))
    assert seps and all(check_wide_separation(g, s) for s in seps)
    pair_of = lambda i: frozenset(g.edges[i][:2])
    cycle = {frozenset(p) for p in [(1, 2), (2, 3), (3, 4), (1, 4)]}
    hit = [s for s in seps if {pair_of(i) for i in s.c4} == cycle]
    assert hit
    sides = {frozenset(pair_of(i) for i in s.g1_edges) for s in hit} | {frozenset(pair_of(i) for i in s.g2_edges) for s in hit}
    assert frozenset({frozenset((1, 3))}) in sides and frozenset({frozenset((2, 4))}) in sides
    assert find_wide_separation(g) is not None


@pytest.mark.parametrize("parity", [EVEN, ODD])
def test_triangle_has_no_wide_separation(parity):
    assert find_wide_separation(SignedGraph(3, [(1, 2, parity), (1, 3, 0), (2, 3, 0)])) is None


def test_w4o_has_no_wide_separation():
    assert find_wide_separation(w4o()) is None
    assert find_wide_separation(w4o(), absorb_parallels=True) is None


def test_even_four_cycle_is_not_a_separation_cycle():
    c4 = SignedGraph(4, [(1, 2, 0), (2, 3, 0), (3, 4, 0), (1, 4, 0)])
    assert find_wide_separation(c4) is None
    odd = SignedGraph(4, [(1, 2, 1), (2, 3, 0), (3, 4, 0), (1, 4, 0)])
    ws = find_wide_separation(odd)
    assert ws is not None and check_wide_separation(odd, ws)


def test_parallel_cycle_edges_need_absorbing():
    g = SignedGraph(4, [(1, 2, 1), (1, 2, 1), (2, 3, 0), (3, 4, 0), (1, 4, 0)])
    assert find_wide_separation(g) is None
    ws = find_wide_separation(g, absorb_parallels=True)
    assert ws is not None and ws.c4_parallels and check_wide_separation(g, ws)


def test_separation_checker_rejects_tampering():
    g = k4i()
    ws = find_wide_separation(g)
    from dataclasses import replace
    assert not check_wide_separation(g, replace(ws, g1_edges=frozenset()))
    assert not check_wide_separation(g.with_parities(set()), ws)


# -- partial 2-paths ----------------------------------------------------------------------------------

def two_paths(n_max):
    """All 2-paths up to n_max vertices: triangles glued in a row on the current side edges."""
    out = {}
    stack = [(3, [(0, 1), (0, 2), (1, 2)], ((0, 1), (0, 2)))]
    while stack:
        n, edges, sides = stack.pop()
        out.setdefault(canonical_key(simple(n, [(u + 1, v + 1) for u, v in edges])), nx.Graph(edges))
        if n == n_max:
            continue
        for h in sides:
            a, b = h
            other = [s for s in sides if s != h][0]
            for end in (a, b):
                stack.append((n + 1, edges + [(a, n), (b, n)], (other, (end, n))))
    return list(out.values())


def partial_2_path_oracle(g, hosts):
    target = nx.Graph([(u, v) for u, v, _ in g.edges])
    return any(H.number_of_nodes() >= g.n and
               nx.algorithms.isomorphism.GraphMatcher(H, target).subgraph_is_monomorphic()
               for H in hosts)


def test_partial_2_path_examples():
    assert is_partial_2_path(simple(3, [(1, 2), (1, 3), (2, 3)]))
    assert not is_partial_2_path(pattern("K4"))
    fan = simple(5, [(1, 2), (2, 3), (3, 4), (5, 1), (5, 2), (5, 3), (5, 4)])
    assert is_partial_2_path(fan)
    assert not is_partial_2_path(pattern("K23"))
    with pytest.raises(GraphError):
        is_partial_2_path(simple(3, [(1, 2), (2, 3)]))


def test_partial_2_path_matches_brute_force():
    hosts = two_paths(8)
    checked = 0
    for nxg in nx.graph_atlas_g()[1:]:
        n = nxg.number_of_nodes()
        if n < 3 or n > 6 or not nx.is_biconnected(nxg):
            continue
        g = simple(n, [(u + 1, v + 1) for u, v in nxg.edges()])
        assert is_partial_2_path(g) == partial_2_path_oracle(g, hosts), sorted(nxg.edges())
        checked += 1
    assert checked > 50


# -- traces -------------------------------------------------------------------------------------------

def even_triangle_trace():
    return Wide2PathTrace([Step("base_triangle", ((1, 2, 0), (1, 3, 0), (2, 3, 0)), sides=((1, 2), (1, 3)))])


def test_base_triangle_trace():
    g, sides = validate_trace(even_triangle_trace())
    assert g.same_as(SignedGraph(3, [(1, 2, 0), (1, 3, 0), (2, 3, 0)]))
    assert sides == ((1, 2), (1, 3))


def test_base_k4i_trace():
    g, sides = validate_trace(Wide2PathTrace([Step("base_K4i", k4i().edges, sides=((1, 3), (2, 4)))]))
    assert canonical_key(g) == canonical_key(k4i())
    assert sides == ((1, 3), (2, 4))


def test_glue_triangle_trace():
    steps = even_triangle_trace().steps + [Step("glue_triangle", ((4, 1, 1), (4, 2, 0)), side=(1, 2), new_side=(1, 4))]
    g, sides = validate_trace(Wide2PathTrace(steps))
    assert (g.n, g.m) == (4, 5)
    assert sides == ((1, 3), (1, 4))
    # the two triangles share the side edge 12
    assert sorted(g.pair_counts()) == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4)]


@pytest.mark.parametrize("bad", [
    [Step("add_parallel", ((2, 3, 1),), side=(2, 3))],                        # off-side parallel
    [Step("glue_triangle", ((4, 2, 0), (4, 3, 0)), side=(2, 3), new_side=(2, 4))],   # glue on a non-side
    [Step("glue_triangle", ((4, 1, 0), (4, 2, 0)), side=(1, 2), new_side=(3, 4))],   # new side not in piece
    [Step("glue_triangle", ((3, 1, 0), (3, 2, 0)), side=(1, 2), new_side=(1, 3))],   # reuses a vertex
    [Step("base_triangle", ((1, 2, 0), (1, 3, 0), (2, 3, 0)), sides=((1, 2), (1, 3)))],
])
def test_invalid_steps_are_rejected(bad):
    with pytest.raises(TraceError):
        validate_trace(Wide2PathTrace(even_triangle_trace().steps + bad))


def test_invalid_bases_are_rejected():
    with pytest.raises(TraceError):
        validate_trace(Wide2PathTrace([]))
    with pytest.raises(TraceError):
        # K4^i sides must be a split pair; 12 and 34 are not
        validate_trace(Wide2PathTrace([Step("base_K4i", k4i().edges, sides=((1, 2), (3, 4)))]))
    with pytest.raises(TraceError):
        validate_trace(Wide2PathTrace([Step("base_K4i", pattern("K4e").edges, sides=((1, 3), (2, 4)))]))


def test_trace_json_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(20):
        _, tr = random_wide_2_path(int(rng.integers(3, 8)), rng)
        again = Wide2PathTrace.from_dict(tr.to_dict())
        assert validate_trace(again)[0].same_as(validate_trace(tr)[0])


def test_recognize_examples():
    tri = SignedGraph(3, [(1, 2, 0), (1, 3, 0), (2, 3, 0)])
    tr = recognize_wide_2_path(tri)
    assert [s.kind for s in tr.steps] == ["base_triangle"]
    tr = recognize_wide_2_path(k4i())
    assert [s.kind for s in tr.steps] == ["base_K4i"]
    assert recognize_wide_2_path(w4o()) is None
    assert recognize_wide_2_path(pattern("K4e")) is None


def test_recognize_round_trips_random_wide_2_paths():
    rng = np.random.default_rng(4)
    for _ in range(60):
        g, _ = random_wide_2_path(int(rng.integers(3, 9)), rng)
        u = {v for v in g.vertices if rng.random() < 0.5}
        h = resign(g, u)
        tr = recognize_wide_2_path(h)
        assert tr is not None
        built, _ = validate_trace(tr)
        assert canonical_key(built) == canonical_key(h)


def test_maximal_catalogue_sizes():
    assert [len(maximal_wide_2_paths(n)) for n in range(3, 9)] == [1, 3, 4, 10, 18, 43]


# -- partial wide 2-paths -----------------------------------------------------------------------------

def test_wide_2_path_completes_to_itself_up_to_parallels():
    rng = np.random.default_rng(8)
    for _ in range(20):
        g, _ = random_wide_2_path(int(rng.integers(3, 8)), rng)
        hit = is_partial_wide_2_path(g)
        assert hit is not None and check_completion(g, *hit)


def test_odd_four_cycle_completion():
    c4 = SignedGraph(4, [(1, 2, 1), (2, 3, 0), (3, 4, 0), (1, 4, 0)])
    hit = is_partial_wide_2_path(c4)
    assert hit is not None and check_completion(c4, *hit)


def test_k4e_has_no_completion():
    assert is_partial_wide_2_path(pattern("K4e")) is None
    assert is_partial_wide_2_path(w4o()) is None


def test_completion_checker_rejects_wrong_mapping():
    c4 = SignedGraph(4, [(1, 2, 1), (2, 3, 0), (3, 4, 0), (1, 4, 0)])
    trace, mapping, u = is_partial_wide_2_path(c4)
    assert not check_completion(c4, trace, {1: 1, 2: 1, 3: 3, 4: 4}, u)


def test_table_agrees_with_per_graph_search():
    table = PartialWideTable()
    graphs = list(enumerate_graphs(EnumerationSpec(n_max=5)))
    rng = np.random.default_rng(9)
    for i in rng.choice(len(graphs), 400, replace=False):
        g = graphs[int(i)]
        hit = is_partial_wide_2_path(g)
        assert table.contains(g) == (hit is not None)
        if hit is not None:
            assert check_completion(g, *hit)


def test_table_is_closed_under_edge_deletion():
    table = PartialWideTable()
    rng = np.random.default_rng(10)
    for _ in range(40):
        g, _ = random_wide_2_path(int(rng.integers(3, 8)), rng)
        assert table.contains(g)
        for i in range(g.m):
            h = SignedGraph(g.n, g.edges[:i] + g.edges[i + 1:])
            if is_two_connected(h):
                assert table.contains(h)


# -- W4o class and split pairs ------------------------------------------------------------------------

def test_w4o_class_examples():
    assert is_w4o_class(w4o())
    odd_rim = next(e for e in w4o().edges if e[2] == ODD)
    assert is_w4o_class(SignedGraph(5, list(w4o().edges) + [odd_rim]))
    mixed = SignedGraph(5, list(w4o().edges) + [(odd_rim[0], odd_rim[1], EVEN)])
    assert not is_w4o_class(mixed)
    assert not is_w4o_class(k4i())
    assert is_w4o_class(resign(w4o(), {2, 5}))


def split_pairs_oracle(g):
    par = {frozenset(e[:2]): e[2] for e in g.edges}
    triangles = list(itertools.combinations(range(1, 5), 3))
    tri_par = {t: sum(par[frozenset(p)] for p in itertools.combinations(t, 2)) % 2 for t in triangles}
    out = []
    for i, j in itertools.combinations(range(6), 2):
        e, f = set(g.edges[i][:2]), set(g.edges[j][:2])
        if e & f:
            continue
        if all({tri_par[t] for t in triangles if x <= set(t)} == {0, 1} for x in (e, f)):
            out.append((i, j))
    return out


def test_split_pairs():
    assert find_split_pairs(k4i()) == [(1, 4), (2, 3)]
    assert find_split_pairs(pattern("K4e")) == []
    for bits in itertools.product((0, 1), repeat=6):
        g = SignedGraph(4, [(u, v, b) for (u, v, _), b in zip(pattern("K4e").edges, bits)])
        assert find_split_pairs(g) == split_pairs_oracle(g)
    with pytest.raises(GraphError):
        find_split_pairs(w4o())
