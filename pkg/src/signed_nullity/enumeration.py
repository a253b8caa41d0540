"""Enumeration of small 2-connected signed multigraphs up to isomorphism and re-signing."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx

from .graph import GraphError, SignedGraph, canonical_form

MAX_N = 8


@dataclass(frozen=True)
class EnumerationSpec:
    n_max: int = 6
    e_max: int = 12
    max_parallel: int = 2
    require_two_connected: bool = True
    n_min: int = 2

    def __post_init__(self):
        if self.n_max > MAX_N:
            raise GraphError(f"n_max is limited to {MAX_N}")
        if self.max_parallel not in (1, 2):
            raise GraphError("max_parallel must be 1 or 2")


def _simple_key(n, edges):
    return canonical_form(n, {e: (1, 0) for e in edges})


@lru_cache(maxsize=None)
def simple_graphs(n: int) -> tuple:
    """All simple graphs on ``n`` vertices up to isomorphism, as sorted 0-based edge tuples."""
    if n <= 7:
        out = []
        for g in nx.graph_atlas_g():
            if g.number_of_nodes() == n:
                out.append(tuple(sorted(tuple(sorted(e)) for e in g.edges())))
        return tuple(out)
    seen = {}
    for base in simple_graphs(n - 1):
        for r in range(n):
            for nbrs in itertools.combinations(range(n - 1), r):
                edges = tuple(sorted(base + tuple((v, n - 1) for v in nbrs)))
                seen.setdefault(_simple_key(n, edges), edges)
    return tuple(seen[k] for k in sorted(seen))


def _biconnected(n, edges):
    if n < 3:
        return False
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    return nx.is_biconnected(g)


def _connected(n, edges):
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    return n > 0 and nx.is_connected(g)


# pair types: single edge, two edges of one parity, one even plus one odd
SINGLE, DOUBLE, MIXED = 1, 2, 3


def _labelled_classes(n, pairs, types):
    """Yield label dicts, one per re-signing class of the given pair types."""
    nonmixed = [p for p, t in zip(pairs, types) if t != MIXED]
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    forest = set()
    for a, b in nonmixed:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            forest.add((a, b))
    free = [p for p in nonmixed if p not in forest]
    for bits in itertools.product((0, 1), repeat=len(free)):
        odd = {p for p, b in zip(free, bits) if b}
        labels = {}
        for p, t in zip(pairs, types):
            if t == MIXED:
                labels[p] = (1, 1)
            else:
                c = 1 if t == SINGLE else 2
                labels[p] = (0, c) if p in odd else (c, 0)
        yield labels


def labels_to_graph(n: int, labels: dict) -> SignedGraph:
    edges = []
    for (a, b), (ce, co) in sorted(labels.items()):
        edges += [(a + 1, b + 1, 0)] * ce + [(a + 1, b + 1, 1)] * co
    return SignedGraph(n, edges)


def enumerate_graphs(spec: EnumerationSpec = EnumerationSpec()):
    """Yield one representative per class, ordered by (n, edge count, key)."""
    if spec.n_max < 1:
        return
    for n in range(max(1, spec.n_min), spec.n_max + 1):
        found = {}
        if n == 2:
            # two vertices: only parallel classes can make it 2-connected
            options = [((1, 0),)] if not spec.require_two_connected else []
            if spec.max_parallel >= 2 and spec.e_max >= 2:
                options += [((2, 0),), ((1, 1),)]
            for (lab,) in options:
                labels = {(0, 1): lab}
                found[canonical_form(2, labels)] = labels
        elif n == 1:
            if not spec.require_two_connected:
                found[canonical_form(1, {})] = {}
        else:
            for pairs in simple_graphs(n):
                if len(pairs) > spec.e_max:
                    continue
                if spec.require_two_connected and not _biconnected(n, pairs):
                    continue
                choices = (SINGLE, DOUBLE, MIXED) if spec.max_parallel >= 2 else (SINGLE,)
                for types in itertools.product(choices, repeat=len(pairs)):
                    if sum(1 if t == SINGLE else 2 for t in types) > spec.e_max:
                        continue
                    for labels in _labelled_classes(n, pairs, types):
                        found.setdefault(canonical_form(n, labels), labels)
        rows = sorted(found.items(), key=lambda kv: (sum(map(sum, kv[1].values())), kv[0]))
        for key, labels in rows:
            yield labels_to_graph(n, labels)
