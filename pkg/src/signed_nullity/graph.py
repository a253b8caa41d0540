"""Signed multigraphs: re-signing, cycles, elementary reductions, canonical keys.

Vertices are labelled ``1..n``. Edges are ``(u, v, parity)`` triples with
``parity`` 0 (even) or 1 (odd); an edge is identified by its position in
``SignedGraph.edges`` so parallel edges stay distinguishable.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path

EVEN = 0
ODD = 1

_PARITY_NAMES = {"even": EVEN, "odd": ODD, 0: EVEN, 1: ODD, "e": EVEN, "o": ODD}


class GraphError(ValueError):
    """Raised for malformed graphs or out-of-range references."""


class SizeGuardError(GraphError):
    """Raised when an exponential-time routine is asked for a too-large input."""


def parse_parity(p) -> int:
    try:
        return _PARITY_NAMES[p.lower() if isinstance(p, str) else p]
    except (KeyError, AttributeError):
        raise GraphError(f"unknown parity {p!r}") from None


@dataclass(frozen=True)
class SignedGraph:
    n: int
    edges: tuple

    def __init__(self, n: int, edges=()):
        norm = []
        for e in edges:
            if len(e) != 3:
                raise GraphError(f"edge {e!r} must be (u, v, parity)")
            u, v, p = int(e[0]), int(e[1]), parse_parity(e[2])
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphError(f"edge {e!r} has a vertex outside 1..{n}")
            if u == v:
                raise GraphError(f"loop at vertex {u} is not allowed")
            norm.append((u, v, p))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", tuple(norm))

    def __repr__(self):
        es = ", ".join(f"{u}{'-' if p == EVEN else '~'}{v}" for u, v, p in self.edges)
        return f"SignedGraph(n={self.n}, [{es}])"

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def odd_edges(self) -> frozenset:
        return frozenset(i for i, e in enumerate(self.edges) if e[2] == ODD)

    def pair_counts(self) -> dict:
        """Map ``(min, max)`` vertex pair to ``[#even, #odd]``."""
        out = {}
        for u, v, p in self.edges:
            key = (u, v) if u < v else (v, u)
            out.setdefault(key, [0, 0])[p] += 1
        return out

    def parallel_classes(self) -> dict:
        """Map vertex pair to the list of edge indices joining it."""
        out = {}
        for i, (u, v, _) in enumerate(self.edges):
            out.setdefault((min(u, v), max(u, v)), []).append(i)
        return out

    def neighbors(self) -> dict:
        nb = {v: set() for v in self.vertices}
        for u, v, _ in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return nb

    def with_parities(self, odd) -> "SignedGraph":
        """Same multigraph, with odd-edge set replaced by ``odd`` (edge indices)."""
        odd = set(odd)
        if not odd <= set(range(self.m)):
            raise GraphError("odd-edge set references unknown edges")
        return SignedGraph(self.n, [(u, v, int(i in odd)) for i, (u, v, _) in enumerate(self.edges)])

    def sorted_edges(self) -> tuple:
        return tuple(sorted((min(u, v), max(u, v), p) for u, v, p in self.edges))

    def same_as(self, other: "SignedGraph") -> bool:
        """Equality as labelled signed multigraphs, ignoring edge order."""
        return self.n == other.n and self.sorted_edges() == other.sorted_edges()

    # -- interchange -----------------------------------------------------
    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [[u, v, "odd" if p else "even"] for u, v, p in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "SignedGraph":
        if "n" not in d or "edges" not in d:
            raise GraphError("graph JSON needs keys 'n' and 'edges'")
        return cls(d["n"], [tuple(e) for e in d["edges"]])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def load(cls, path) -> "SignedGraph":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def dump(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def _check_vertices(g: SignedGraph, vs) -> None:
    for v in vs:
        if not 1 <= v <= g.n:
            raise GraphError(f"vertex {v} outside 1..{g.n}")


def resign(g: SignedGraph, u_set) -> SignedGraph:
    """Flip the parity of every edge with exactly one end in ``u_set``."""
    u_set = set(u_set)
    _check_vertices(g, u_set)
    return SignedGraph(g.n, [(u, v, p ^ ((u in u_set) != (v in u_set))) for u, v, p in g.edges])


def permute(g: SignedGraph, perm) -> SignedGraph:
    """Relabel vertices; ``perm`` maps old label to new label (dict or 1-based list)."""
    if not isinstance(perm, dict):
        perm = {i + 1: int(x) for i, x in enumerate(perm)}
    if sorted(perm) != list(g.vertices) or sorted(perm.values()) != list(g.vertices):
        raise GraphError("perm must be a bijection of 1..n")
    return SignedGraph(g.n, [(perm[u], perm[v], p) for u, v, p in g.edges])


def diagonal_signs(n: int, u_set) -> list:
    """Diagonal of the +-1 similarity matching a re-signing on ``u_set``."""
    return [-1 if v in set(u_set) else 1 for v in range(1, n + 1)]


# -- cycles and switching -----------------------------------------------------

def simple_cycles(g: SignedGraph, max_vertices: int = 10):
    """Yield every cycle of ``g`` as a frozenset of edge indices.

    Includes 2-cycles formed by pairs of parallel edges.
    """
    if g.n > max_vertices:
        raise SizeGuardError(f"cycle enumeration limited to {max_vertices} vertices")
    classes = g.parallel_classes()
    for idx in classes.values():
        for a, b in itertools.combinations(idx, 2):
            yield frozenset((a, b))
    nb = {v: sorted(w for w in g.neighbors()[v]) for v in g.vertices}

    def pair_edges(a, b):
        return classes[(min(a, b), max(a, b))]

    # vertex cycles rooted at their smallest vertex, second vertex < last vertex
    for root in g.vertices:
        stack = [(root, [root])]
        while stack:
            v, path = stack.pop()
            for w in nb[v]:
                if w == root and len(path) >= 3 and path[1] < path[-1]:
                    walk = path + [root]
                    for choice in itertools.product(*(pair_edges(walk[i], walk[i + 1]) for i in range(len(path)))):
                        yield frozenset(choice)
                elif w > root and w not in path:
                    stack.append((w, path + [w]))


def odd_cycle_fingerprint(g: SignedGraph, max_vertices: int = 10) -> frozenset:
    """Edge sets of all cycles containing an odd number of odd edges."""
    odd = g.odd_edges()
    return frozenset(c for c in simple_cycles(g, max_vertices) if len(c & odd) % 2 == 1)


def is_sign_equivalent(g: SignedGraph, sigma2):
    """Decide whether odd-edge set ``sigma2`` is a re-signing of ``g``'s.

    Returns ``(True, U)`` with ``U`` the re-signing set, or ``(False, None)``.
    """
    sigma2 = frozenset(sigma2)
    if not sigma2 <= set(range(g.m)):
        raise GraphError("sigma2 contains unknown edges")
    diff = g.odd_edges() ^ sigma2
    adj = {v: [] for v in g.vertices}
    for i, (u, v, _) in enumerate(g.edges):
        c = int(i in diff)
        adj[u].append((v, c))
        adj[v].append((u, c))
    side = {}
    for s in g.vertices:
        if s in side:
            continue
        side[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w, c in adj[v]:
                if w not in side:
                    side[w] = side[v] ^ c
                    queue.append(w)
                elif side[w] != side[v] ^ c:
                    return False, None
    return True, frozenset(v for v, s in side.items() if s)


# -- elementary reductions ---------------------------------------------------------

def delete_edge(g: SignedGraph, index: int) -> SignedGraph:
    if not 0 <= index < g.m:
        raise GraphError(f"no edge with index {index}")
    return SignedGraph(g.n, g.edges[:index] + g.edges[index + 1:])


def delete_vertex(g: SignedGraph, v: int) -> SignedGraph:
    _check_vertices(g, [v])
    shift = lambda x: x - 1 if x > v else x
    return SignedGraph(g.n - 1, [(shift(a), shift(b), p) for a, b, p in g.edges if v not in (a, b)])


def _identify(g: SignedGraph, index: int, flip_at=None) -> SignedGraph:
    u, v, _ = g.edges[index]
    keep, gone = min(u, v), max(u, v)

    def relabel(x):
        if x == gone:
            x = keep
        return x - 1 if x > gone else x

    out = []
    for i, (a, b, p) in enumerate(g.edges):
        if i == index or {a, b} == {u, v}:
            continue  # the edge itself and its parallel mates become loops
        if flip_at is not None and flip_at in (a, b):
            p ^= 1
        out.append((relabel(a), relabel(b), p))
    return SignedGraph(g.n - 1, out)


def contract_even(g: SignedGraph, index: int) -> SignedGraph:
    """Contract an even edge; parallel mates turn into loops and are dropped."""
    if not 0 <= index < g.m:
        raise GraphError(f"no edge with index {index}")
    if g.edges[index][2] != EVEN:
        raise GraphError("contract_even needs an even edge")
    return _identify(g, index)


def contract_weak(g: SignedGraph, index: int) -> SignedGraph:
    """Contract any edge, leaving the parities of the remaining edges alone."""
    if not 0 <= index < g.m:
        raise GraphError(f"no edge with index {index}")
    return _identify(g, index)


def contract_resigned(g: SignedGraph, index: int) -> SignedGraph:
    """Re-sign one end of the edge if needed so that it is even, then contract.

    This is the contraction available inside the strict minor relation.
    """
    if not 0 <= index < g.m:
        raise GraphError(f"no edge with index {index}")
    u, _, p = g.edges[index]
    return _identify(g, index, flip_at=u if p == ODD else None)


def reduce_parallel_classes(g: SignedGraph):
    """Keep one edge per (pair, parity); report whether every class was single-parity."""
    seen = set()
    parities = {}
    out = []
    for u, v, p in g.edges:
        pair = (min(u, v), max(u, v))
        parities.setdefault(pair, set()).add(p)
        if (pair, p) not in seen:
            seen.add((pair, p))
            out.append((u, v, p))
    uniform = all(len(s) == 1 for s in parities.values())
    return SignedGraph(g.n, out), uniform


def underlying_simple(g: SignedGraph) -> SignedGraph:
    """One even edge per adjacent pair; parity is forgotten."""
    return SignedGraph(g.n, [(u, v, EVEN) for (u, v) in sorted(g.pair_counts())])


def _connected(vertices, nb) -> bool:
    vertices = set(vertices)
    if not vertices:
        return True
    start = next(iter(vertices))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in nb[v]:
            if w in vertices and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == vertices


def is_connected(g: SignedGraph) -> bool:
    return _connected(g.vertices, g.neighbors())


def is_two_connected(g: SignedGraph, allow_digon: bool = True) -> bool:
    """2-connectivity of the underlying simple graph.

    With ``allow_digon`` the two-vertex multigraph with at least two parallel
    edges also counts as 2-connected.
    """
    if g.n == 2:
        return allow_digon and g.m >= 2
    if g.n < 3:
        return False
    nb = g.neighbors()
    if not _connected(g.vertices, nb):
        return False
    return all(_connected(set(g.vertices) - {v}, nb) for v in g.vertices)


def components(g: SignedGraph) -> list:
    nb = g.neighbors()
    seen = set()
    out = []
    for s in g.vertices:
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for w in nb[v]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        out.append(sorted(comp))
    return out


# -- M <= 1 and xi <= 1 -------------------------------------------------------------

def _path_shaped(vertices, pairs) -> bool:
    vs = set(vertices)
    inner = [p for p in pairs if p[0] in vs]
    deg = {v: 0 for v in vs}
    for a, b in inner:
        deg[a] += 1
        deg[b] += 1
    return len(inner) == len(vs) - 1 and all(d <= 2 for d in deg.values())


def _uniform_classes(g: SignedGraph) -> bool:
    return all(ce == 0 or co == 0 for ce, co in g.pair_counts().values())


def m_le_1_check(g: SignedGraph) -> bool:
    """Sign-equivalent to an all-even graph whose underlying simple graph is a path."""
    return (
        g.n >= 1
        and is_connected(g)
        and _path_shaped(g.vertices, g.pair_counts())
        and _uniform_classes(g)
    )


def xi_le_1_check(g: SignedGraph) -> bool:
    """Sign-equivalent to an all-even graph whose underlying simple graph is a union of paths."""
    pairs = g.pair_counts()
    return _uniform_classes(g) and all(_path_shaped(c, pairs) for c in components(g))


# -- canonical form ---------------------------------------------------------------------

CANON_MAX_VERTICES = 8


def _flip(label):
    return (label[1], label[0]) + tuple(label[2:])


def canonical_form(n: int, labels: dict, max_vertices: int = CANON_MAX_VERTICES) -> bytes:
    """Canonical bytes of a labelled pair structure up to relabelling and switching.

    ``labels`` maps 0-based pairs ``(i, j)``, ``i < j``, to tuples whose first
    two entries are the even and odd multiplicities; switching swaps them.
    Further entries are carried along as marks.
    """
    if n > max_vertices:
        raise SizeGuardError(f"canonical form limited to {max_vertices} vertices")
    adj = [[] for _ in range(n)]
    for (i, j) in labels:
        adj[i].append(j)
        adj[j].append(i)

    def ulab(lab):
        return (min(lab[0], lab[1]), max(lab[0], lab[1])) + tuple(lab[2:])

    def lab(a, b):
        return labels[(a, b) if a < b else (b, a)]

    # switching-invariant vertex colouring, refined to a fixed point
    odd_tri = [0] * n
    for (i, j), lij in labels.items():
        if lij[0] == lij[1]:
            continue
        for k in adj[i]:
            if k > j and (j, k) in labels:
                ljk, lik = labels[(j, k)], lab(i, k)
                if ljk[0] == ljk[1] or lik[0] == lik[1]:
                    continue
                par = (lij[0] < lij[1]) ^ (ljk[0] < ljk[1]) ^ (lik[0] < lik[1])
                if par:
                    odd_tri[i] += 1
                    odd_tri[j] += 1
                    odd_tri[k] += 1
    colour = [(len(adj[v]), odd_tri[v], tuple(sorted(ulab(lab(v, w)) for w in adj[v]))) for v in range(n)]
    ranks = _ranks(colour)
    while True:
        sig = [(ranks[v], tuple(sorted((ranks[w], ulab(lab(v, w))) for w in adj[v]))) for v in range(n)]
        new = _ranks(sig)
        if len(set(new)) == len(set(ranks)):
            break
        ranks = new
    order = sorted(range(n), key=lambda v: ranks[v])
    cells = [list(g) for _, g in itertools.groupby(order, key=lambda v: ranks[v])]

    best = None
    for choice in itertools.product(*(itertools.permutations(c) for c in cells)):
        new_of = [0] * n
        pos = 0
        for cell in choice:
            for v in cell:
                new_of[v] = pos
                pos += 1
        enc = _encode(n, labels, adj, new_of)
        if best is None or enc < best:
            best = enc
    flat = [n]
    for item in best:
        flat.extend(item)
    return bytes(flat)


def _ranks(values):
    distinct = sorted(set(values))
    index = {x: i for i, x in enumerate(distinct)}
    return [index[x] for x in values]


def _encode(n, labels, adj, new_of):
    old_of = [0] * n
    for old, new in enumerate(new_of):
        old_of[new] = old
    pot = [-1] * n
    for root in range(n):
        if pot[root] >= 0:
            continue
        pot[root] = 0
        queue = deque([root])
        while queue:
            a = queue.popleft()
            oa = old_of[a]
            for ow in sorted(adj[oa], key=lambda x: new_of[x]):
                w = new_of[ow]
                if pot[w] >= 0:
                    continue
                lab = labels[(oa, ow) if oa < ow else (ow, oa)]
                if lab[0] == lab[1]:
                    continue
                pot[w] = pot[a] ^ (lab[0] < lab[1])
                queue.append(w)
    out = []
    for a in range(n):
        oa = old_of[a]
        for b in range(a + 1, n):
            ob = old_of[b]
            lab = labels.get((oa, ob) if oa < ob else (ob, oa))
            if lab is None:
                continue
            if pot[a] ^ pot[b]:
                lab = _flip(lab)
            out.append((a, b) + tuple(lab))
    return tuple(out)


def graph_labels(g: SignedGraph) -> dict:
    return {(u - 1, v - 1): (c[0], c[1]) for (u, v), c in g.pair_counts().items()}


def canonical_key(g: SignedGraph, max_vertices: int = CANON_MAX_VERTICES) -> bytes:
    """Equal iff the graphs agree up to vertex relabelling composed with re-signing."""
    return canonical_form(g.n, graph_labels(g), max_vertices)


def canonical_hex(g: SignedGraph, max_vertices: int = CANON_MAX_VERTICES) -> str:
    return canonical_key(g, max_vertices).hex()
