"""Weak minors and minors of small signed patterns.

Two independent engines live here:

* :func:`find_minor` searches connected branch sets and solves the parity
  constraints over GF(2); it returns a replayable :class:`MinorEmbedding`.
* :class:`MinorTable` decides containment by memoised one-step reductions
  over canonical keys. It gives no witness but is fast across many hosts
  that share minors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .graph import (
    EVEN,
    ODD,
    GraphError,
    SignedGraph,
    SizeGuardError,
    canonical_form,
    canonical_key,
    resign,
)

WEAK = "weak"
STRICT = "strict"
UNSIGNED = "unsigned"


# -- pattern catalog -----------------------------------------------------------------

def complete(n: int, parity: int = EVEN) -> SignedGraph:
    return SignedGraph(n, [(i, j, parity) for i, j in itertools.combinations(range(1, n + 1), 2)])


def _k23(odd_first: bool) -> SignedGraph:
    edges = [(a, b, EVEN) for a in (1, 2) for b in (3, 4, 5)]
    if odd_first:
        edges[0] = (1, 3, ODD)
    return SignedGraph(5, edges)


def k4i() -> SignedGraph:
    return SignedGraph(4, [(1, 2, ODD), (1, 3, EVEN), (1, 4, EVEN), (2, 3, EVEN), (2, 4, EVEN), (3, 4, EVEN)])


def w4o() -> SignedGraph:
    """Rim 1-2-3-4, hub 5; rim edges 23 and 41 odd, everything else even."""
    return SignedGraph(5, [
        (1, 2, EVEN), (2, 3, ODD), (3, 4, EVEN), (4, 1, ODD),
        (5, 1, EVEN), (5, 2, EVEN), (5, 3, EVEN), (5, 4, EVEN),
    ])


def w4_shape() -> SignedGraph:
    return SignedGraph(5, [(1, 2, 0), (2, 3, 0), (3, 4, 0), (4, 1, 0), (5, 1, 0), (5, 2, 0), (5, 3, 0), (5, 4, 0)])


def prism() -> SignedGraph:
    return SignedGraph(6, [(1, 2, 0), (2, 3, 0), (1, 3, 0), (4, 5, 0), (5, 6, 0), (4, 6, 0), (1, 4, 0), (2, 5, 0), (3, 6, 0)])


PATTERNS = {
    "K2eq": SignedGraph(2, [(1, 2, EVEN), (1, 2, ODD)]),
    "K3eq": SignedGraph(3, [(1, 2, EVEN), (1, 2, ODD), (1, 3, EVEN), (1, 3, ODD), (2, 3, EVEN), (2, 3, ODD)]),
    "K3e": complete(3),
    "K3o": complete(3, ODD),
    "K4e": complete(4),
    "K4o": complete(4, ODD),
    "K4i": k4i(),
    "K23e": _k23(False),
    "K23i": _k23(True),
    "W4o": w4o(),
    "W4": w4_shape(),
    "K4": complete(4),
    "K23": _k23(False),
    "prism": prism(),
}
for _n in range(2, 9):
    PATTERNS[f"K{_n}e"] = complete(_n)
    PATTERNS[f"K{_n}o"] = complete(_n, ODD)

FORBIDDEN = ("K3eq", "K4e", "K4o", "K23e")


def pattern(name: str) -> SignedGraph:
    try:
        return PATTERNS[name]
    except KeyError:
        raise GraphError(f"unknown pattern {name!r}; known: {sorted(PATTERNS)}") from None


# -- witnesses ------------------------------------------------------------------------------

@dataclass
class MinorEmbedding:
    """Witness that ``pattern`` is a (weak) minor of ``host``.

    ``edge_map[k]`` is the host edge standing for pattern edge ``k``;
    ``contracted`` lists host edges contracted inside branch sets (a spanning
    tree of each). Parities are read after re-signing ``host`` on
    ``resign_set``.
    """

    branch_sets: dict
    edge_map: dict
    resign_set: frozenset
    mode: str
    contracted: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "branch_sets": {str(k): sorted(v) for k, v in sorted(self.branch_sets.items())},
            "edge_map": {str(k): v for k, v in sorted(self.edge_map.items())},
            "resign_set": sorted(self.resign_set),
            "contracted": list(self.contracted),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MinorEmbedding":
        return cls(
            branch_sets={int(k): frozenset(v) for k, v in d["branch_sets"].items()},
            edge_map={int(k): int(v) for k, v in d["edge_map"].items()},
            resign_set=frozenset(d["resign_set"]),
            mode=d["mode"],
            contracted=[int(x) for x in d.get("contracted", [])],
        )


def replay_embedding(host: SignedGraph, pat: SignedGraph, emb: MinorEmbedding) -> bool:
    """Independently re-check a witness against its definition."""
    h = resign(host, emb.resign_set)
    owner = {}
    if sorted(emb.branch_sets) != list(pat.vertices):
        return False
    for pv, bs in emb.branch_sets.items():
        if not bs:
            return False
        for hv in bs:
            if hv in owner or not 1 <= hv <= host.n:
                return False
            owner[hv] = pv
    # contracted edges: a spanning tree of every branch set
    tree_edges = {pv: [] for pv in emb.branch_sets}
    for ei in emb.contracted:
        if not 0 <= ei < h.m:
            return False
        a, b, p = h.edges[ei]
        if owner.get(a) is None or owner.get(a) != owner.get(b):
            return False
        if emb.mode == STRICT and p != EVEN:
            return False
        tree_edges[owner[a]].append((a, b))
    for pv, bs in emb.branch_sets.items():
        if len(tree_edges[pv]) != len(bs) - 1 or not _spans(bs, tree_edges[pv]):
            return False
    if sorted(emb.edge_map) != list(range(pat.m)) or len(set(emb.edge_map.values())) != pat.m:
        return False
    for k, (pu, pv, pp) in enumerate(pat.edges):
        ei = emb.edge_map[k]
        if not 0 <= ei < h.m or ei in emb.contracted:
            return False
        a, b, p = h.edges[ei]
        if {owner.get(a), owner.get(b)} != {pu, pv}:
            return False
        if emb.mode != UNSIGNED and p != pp:
            return False
    return True


def _spans(vertices, edges) -> bool:
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
    return len({find(v) for v in vertices}) == 1


# -- branch-set search ---------------------------------------------------------------------------

class _ParityDSU:
    """Union-find over GF(2) potentials with undo (no path compression)."""

    def __init__(self, items):
        self.parent = {x: x for x in items}
        self.par = {x: 0 for x in items}
        self.size = {x: 1 for x in items}
        self.log = []

    def find(self, x):
        p = 0
        while self.parent[x] != x:
            p ^= self.par[x]
            x = self.parent[x]
        return x, p

    def union(self, a, b, c) -> bool:
        """Impose x_a + x_b = c; return False on contradiction."""
        ra, pa = self.find(a)
        rb, pb = self.find(b)
        if ra == rb:
            self.log.append(None)
            return (pa ^ pb) == c
        if self.size[ra] > self.size[rb]:
            ra, rb = rb, ra
        self.parent[ra] = rb
        self.par[ra] = pa ^ pb ^ c
        self.size[rb] += self.size[ra]
        self.log.append((ra, rb))
        return True

    def undo(self):
        entry = self.log.pop()
        if entry is not None:
            ra, rb = entry
            self.parent[ra] = ra
            self.par[ra] = 0
            self.size[rb] -= self.size[ra]

    def assignment(self) -> frozenset:
        return frozenset(x for x in self.parent if self.find(x)[1])


def _connected_subsets(vertices, nb, max_size):
    """All connected vertex subsets, ordered by size then lexicographically."""
    found = set()
    frontier = {frozenset([v]) for v in vertices}
    size = 1
    while frontier and size <= max_size:
        found |= frontier
        nxt = set()
        for s in frontier:
            for v in s:
                for w in nb[v]:
                    if w in vertices and w not in s:
                        nxt.add(s | {w})
        frontier = nxt
        size += 1
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _spanning_trees(bs, host, allowed_edges):
    """Edge-index lists forming spanning trees of host[bs] (parallel edges distinguished)."""
    if len(bs) == 1:
        return [()]
    inner = [i for i in allowed_edges if host.edges[i][0] in bs and host.edges[i][1] in bs]
    out = []
    for combo in itertools.combinations(inner, len(bs) - 1):
        if _spans(bs, [host.edges[i][:2] for i in combo]):
            out.append(combo)
    return out


HOST_MAX_VERTICES = 12
HOST_MAX_EDGES = 20
PATTERN_MAX_VERTICES = 6


def find_minor(host: SignedGraph, pat: SignedGraph, mode: str = WEAK,
               max_vertices: int = HOST_MAX_VERTICES, max_edges: int = HOST_MAX_EDGES):
    """Return a :class:`MinorEmbedding` of ``pat`` in ``host`` or ``None``.

    ``mode`` is ``"weak"`` (any edge may be contracted), ``"strict"`` (one
    re-signing, then only even edges are contracted) or ``"unsigned"``
    (parities ignored).
    """
    if mode not in (WEAK, STRICT, UNSIGNED):
        raise ValueError(f"unknown mode {mode!r}")
    if host.n > max_vertices or host.m > max_edges:
        raise SizeGuardError(f"host exceeds {max_vertices} vertices / {max_edges} edges")
    if pat.n > PATTERN_MAX_VERTICES:
        raise SizeGuardError(f"pattern exceeds {PATTERN_MAX_VERTICES} vertices")
    if pat.n > host.n or pat.m > host.m:
        return None
    nb = host.neighbors()
    hv = list(host.vertices)
    subsets = _connected_subsets(hv, nb, host.n - pat.n + 1)

    pat_pairs = pat.parallel_classes()
    pnb = pat.neighbors()
    # pattern vertices in an order where each has an earlier neighbour when possible
    order = []
    for start in pat.vertices:
        if start in order:
            continue
        order.append(start)
        i = len(order) - 1
        while i < len(order):
            for w in sorted(pnb[order[i]]):
                if w not in order:
                    order.append(w)
            i += 1

    host_pair_edges = host.parallel_classes()

    def between(b1, b2):
        out = []
        for a in b1:
            for b in b2:
                out.extend(host_pair_edges.get((min(a, b), max(a, b)), ()))
        return sorted(out)

    assigned = {}

    def solve_parity():
        """Choose host edges for pattern edges and trees; solve GF(2)."""
        slots = []  # (kind, data)
        bsets = {pv: assigned[pv] for pv in pat.vertices}
        if mode == STRICT:
            all_idx = range(host.m)
            for pv in pat.vertices:
                trees = _spanning_trees(bsets[pv], host, all_idx)
                if not trees:
                    return None
                slots.append(("tree", pv, trees))
        for (a, b), idxs in sorted(pat_pairs.items()):
            cands = between(bsets[a], bsets[b])
            if len(cands) < len(idxs):
                return None
            slots.append(("pair", idxs, cands))
        dsu = _ParityDSU(hv)
        chosen_trees = {}
        edge_map = {}
        used = set()

        def rec(k):
            if k == len(slots):
                return True
            kind = slots[k][0]
            if kind == "tree":
                _, pv, trees = slots[k]
                for tree in trees:
                    ok, n_ops = True, 0
                    for ei in tree:
                        a, b, p = host.edges[ei]
                        n_ops += 1
                        if not dsu.union(a, b, p):
                            ok = False
                            break
                    if ok:
                        chosen_trees[pv] = tree
                        if rec(k + 1):
                            return True
                    for _ in range(n_ops):
                        dsu.undo()
                return False
            _, idxs, cands = slots[k]
            for combo in itertools.permutations(cands, len(idxs)):
                if any(c in used for c in combo):
                    continue
                ok, n_ops = True, 0
                if mode != UNSIGNED:
                    for pe, he in zip(idxs, combo):
                        a, b, p = host.edges[he]
                        n_ops += 1
                        if not dsu.union(a, b, p ^ pat.edges[pe][2]):
                            ok = False
                            break
                if ok:
                    for pe, he in zip(idxs, combo):
                        edge_map[pe] = he
                    used.update(combo)
                    if rec(k + 1):
                        return True
                    used.difference_update(combo)
                for _ in range(n_ops):
                    dsu.undo()
            return False

        if not rec(0):
            return None
        if mode == STRICT:
            contracted = [ei for pv in pat.vertices for ei in chosen_trees[pv]]
        else:
            contracted = [ei for pv in pat.vertices for ei in _spanning_trees(bsets[pv], host, range(host.m))[0]]
        resign_set = dsu.assignment() if mode != UNSIGNED else frozenset()
        return MinorEmbedding(
            branch_sets={pv: frozenset(bsets[pv]) for pv in pat.vertices},
            edge_map=dict(sorted(edge_map.items())),
            resign_set=resign_set,
            mode=mode,
            contracted=contracted,
        )

    used_vertices = set()

    def place(i):
        if i == len(order):
            return solve_parity()
        pv = order[i]
        remaining = pat.n - i - 1
        for s in subsets:
            if len(s) + len(used_vertices) + remaining > host.n:
                break
            if s & used_vertices:
                continue
            ok = True
            for w in pnb[pv]:
                if w in assigned:
                    need = len(pat_pairs[(min(pv, w), max(pv, w))])
                    if len(between(s, assigned[w])) < need:
                        ok = False
                        break
            if not ok:
                continue
            assigned[pv] = s
            used_vertices.update(s)
            res = place(i + 1)
            if res is not None:
                return res
            used_vertices.difference_update(s)
            del assigned[pv]
        return None

    return place(0)


def has_weak_minor(host: SignedGraph, pat: SignedGraph, **kw):
    return find_minor(host, pat, WEAK, **kw)


def has_minor(host: SignedGraph, pat: SignedGraph, **kw):
    return find_minor(host, pat, STRICT, **kw)


def has_unsigned_minor(host: SignedGraph, pat: SignedGraph, **kw):
    return find_minor(host, pat, UNSIGNED, **kw)


def forbidden_check(host: SignedGraph, names=FORBIDDEN) -> dict:
    """Both minor relations for each forbidden pattern, with witnesses."""
    report = {"strict": {}, "weak": {}, "witnesses": {"strict": {}, "weak": {}}}
    for name in names:
        for mode in (STRICT, WEAK):
            emb = find_minor(host, pattern(name), mode)
            report[mode][name] = emb is not None
            report["witnesses"][mode][name] = emb.to_dict() if emb else None
    report["clear_strict"] = not any(report[STRICT].values())
    report["clear_weak"] = not any(report[WEAK].values())
    return report


# -- W4 signatures ------------------------------------------------------------------------------------

def w4_signature_classify(g: SignedGraph) -> dict:
    """Classify a signed graph whose underlying graph is exactly the 4-wheel.

    Returns ``{"sign_equiv_W4o": bool, "has_forbidden": name or None,
    "odd_triangles": [...]}`` following the odd-triangle count through the hub.
    """
    pairs = g.pair_counts()
    if g.n != 5 or g.m != 8 or len(pairs) != 8:
        raise GraphError("underlying graph must be W4 without parallel edges")
    deg = {v: 0 for v in g.vertices}
    for u, v in pairs:
        deg[u] += 1
        deg[v] += 1
    hubs = [v for v, d in deg.items() if d == 4]
    if sorted(deg.values()) != [3, 3, 3, 3, 4] or len(hubs) != 1:
        raise GraphError("underlying graph is not W4")
    hub = hubs[0]
    rim = [v for v in g.vertices if v != hub]
    par = {p: (0 if c[0] else 1) for p, c in pairs.items()}
    P = lambda a, b: par[(min(a, b), max(a, b))]
    tris = []
    for a, b in itertools.combinations(rim, 2):
        if (min(a, b), max(a, b)) in pairs:
            tris.append(((a, b), P(hub, a) ^ P(hub, b) ^ P(a, b)))
    odd = [t for t, p in tris if p]
    result = {"odd_triangles": [list(t) for t in odd], "sign_equiv_W4o": False, "has_forbidden": None}
    if len(odd) >= 3:
        result["has_forbidden"] = "K4o"
    elif len(odd) <= 1:
        result["has_forbidden"] = "K4e"
    elif set(odd[0]) & set(odd[1]):
        result["has_forbidden"] = "K23e"
    else:
        result["sign_equiv_W4o"] = True
    return result


# -- memoised reduction engine ----------------------------------------------------------------------------

def _reduced_labels(g: SignedGraph) -> dict:
    return {(u - 1, v - 1): (min(c[0], 1), min(c[1], 1)) for (u, v), c in g.pair_counts().items()}


def _drop_isolated(n, labels):
    used = sorted({x for p in labels for x in p})
    if len(used) == n:
        return n, labels
    idx = {v: i for i, v in enumerate(used)}
    return len(used), {(idx[a], idx[b]): lab for (a, b), lab in labels.items()}


def _identify_labels(n, labels, a, b, flip_at=None):
    """Merge vertex b into a (a < b); labels clamp to one edge per parity."""
    out = {}
    for (x, y), lab in labels.items():
        if {x, y} == {a, b}:
            continue
        if flip_at is not None and flip_at in (x, y):
            lab = (lab[1], lab[0])
        x = a if x == b else x
        y = a if y == b else y
        x = x - 1 if x > b else x
        y = y - 1 if y > b else y
        key = (x, y) if x < y else (y, x)
        if key in out:
            old = out[key]
            lab = (min(1, old[0] + lab[0]), min(1, old[1] + lab[1]))
        out[key] = lab
    return _drop_isolated(n - 1, out)


class MinorTable:
    """Memoised containment of a fixed pattern list, by one-step reductions.

    Hosts are reduced to at most one edge per (pair, parity) first; this is
    sound for patterns without same-parity parallel edges, because two such
    host edges always carry equal parity after any re-signing.
    """

    def __init__(self, names=FORBIDDEN, mode: str = WEAK):
        if mode not in (WEAK, STRICT):
            raise ValueError(mode)
        self.names = tuple(names)
        self.mode = mode
        pats = [pattern(x) for x in self.names]
        for p in pats:
            if any(c[0] > 1 or c[1] > 1 for c in p.pair_counts().values()):
                raise ValueError("patterns with same-parity parallel edges are not supported")
        self.keys = {}
        for bit, p in enumerate(pats):
            k = canonical_form(p.n, _reduced_labels(p))
            self.keys[k] = self.keys.get(k, 0) | (1 << bit)
        self.min_edges = min(p.m for p in pats)
        self.min_vertices = min(p.n for p in pats)
        self.full = (1 << len(pats)) - 1
        self.memo = {}

    def mask(self, g: SignedGraph) -> int:
        n, labels = _drop_isolated(g.n, _reduced_labels(g))
        return self._mask(n, labels)

    def contains(self, g: SignedGraph) -> dict:
        m = self.mask(g)
        return {name: bool(m >> i & 1) for i, name in enumerate(self.names)}

    def _mask(self, n, labels, key=None):
        if n < self.min_vertices or sum(a + b for a, b in labels.values()) < self.min_edges:
            return 0
        if key is None:
            key = canonical_form(n, labels)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        m = self.keys.get(key, 0)
        for child in self._children(n, labels):
            if m == self.full:
                break
            m |= self._mask(*child)
        self.memo[key] = m
        return m

    def _children(self, n, labels):
        for pair, (ce, co) in sorted(labels.items()):
            # deletions
            for q in (0, 1):
                if (ce, co)[q]:
                    lab = (0, co) if q == 0 else (ce, 0)
                    new = dict(labels)
                    if lab == (0, 0):
                        del new[pair]
                        yield _drop_isolated(n, new)
                    else:
                        new[pair] = lab
                        yield n, new
        for pair, (ce, co) in sorted(labels.items()):
            a, b = pair
            if self.mode == WEAK:
                # re-signing is free between steps, so both identifications occur
                yield _identify_labels(n, labels, a, b)
                yield _identify_labels(n, labels, a, b, flip_at=a)
            else:
                if ce:
                    yield _identify_labels(n, labels, a, b)
                if co:
                    yield _identify_labels(n, labels, a, b, flip_at=a)
