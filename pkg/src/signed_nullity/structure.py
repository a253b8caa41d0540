"""Structural classes: wide separations, (partial) wide 2-paths, split pairs, the signed 4-wheel."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import networkx as nx

from .graph import (
    EVEN,
    ODD,
    GraphError,
    SignedGraph,
    SizeGuardError,
    canonical_form,
    canonical_key,
    is_two_connected,
    reduce_parallel_classes,
    resign,
)
from .minors import _ParityDSU, w4o

STRUCTURE_MAX_VERTICES = 8


class TraceError(GraphError):
    """A construction trace breaks one of the recursive rules."""


def _pair(a, b):
    return (a, b) if a < b else (b, a)


# -- wide separations -------------------------------------------------------------------

@dataclass
class WideSeparation:
    c4: tuple          # four edge indices, cyclic order r1-s1, s1-r2, r2-s2, s2-r1
    r: tuple           # attachments of g1
    s: tuple           # attachments of g2
    g1_vertices: frozenset
    g1_edges: frozenset
    g2_vertices: frozenset
    g2_edges: frozenset
    c4_parallels: frozenset = frozenset()   # extra edges on cycle pairs, when absorbed

    def to_dict(self) -> dict:
        return {
            "c4_parallels": sorted(self.c4_parallels),
            "c4": list(self.c4),
            "r": list(self.r),
            "s": list(self.s),
            "g1": {"vertices": sorted(self.g1_vertices), "edges": sorted(self.g1_edges)},
            "g2": {"vertices": sorted(self.g2_vertices), "edges": sorted(self.g2_edges)},
        }


def _four_cycles(g: SignedGraph):
    """Yield (r1, s1, r2, s2, edge tuple) for every 4-cycle, each edge choice separately."""
    classes = g.parallel_classes()
    nb = g.neighbors()
    seen = set()
    for a in g.vertices:
        for b in sorted(nb[a]):
            for c in sorted(nb[b]):
                if c == a:
                    continue
                for d in sorted(nb[c]):
                    if d in (a, b) or a not in nb[d]:
                        continue
                    cyc = (a, b, c, d)
                    canon = min(cyc[i:] + cyc[:i] for i in range(4))
                    rev = tuple(reversed(cyc))
                    canon = min(canon, min(rev[i:] + rev[:i] for i in range(4)))
                    if canon in seen:
                        continue
                    seen.add(canon)
                    w = canon
                    walks = [classes[_pair(w[i], w[(i + 1) % 4])] for i in range(4)]
                    for choice in itertools.product(*walks):
                        yield w, choice


def iter_wide_separations(g: SignedGraph, absorb_parallels: bool = False):
    """Yield every wide separation, in a deterministic order.

    By definition an edge parallel to a cycle edge fits in neither side. With
    ``absorb_parallels`` such edges are carried along with the cycle instead,
    which is the notion that survives passing to parallel classes.
    """
    nb = g.neighbors()
    for cyc, c4 in _four_cycles(g):
        if sum(g.edges[i][2] for i in c4) % 2 == 0:
            continue
        cyc_set = set(cyc)
        rest_vertices = [v for v in g.vertices if v not in cyc_set]
        # components of G - V(C4)
        comps = []
        seen = set()
        for v in rest_vertices:
            if v in seen:
                continue
            comp = {v}
            stack = [v]
            while stack:
                x = stack.pop()
                for y in nb[x]:
                    if y not in cyc_set and y not in comp:
                        comp.add(y)
                        stack.append(y)
            seen |= comp
            comps.append(comp)
        for r, s in (((cyc[0], cyc[2]), (cyc[1], cyc[3])), ((cyc[1], cyc[3]), (cyc[0], cyc[2]))):
            side1, side2 = set(r), set(s)
            ok = True
            for comp in comps:
                att = {y for x in comp for y in nb[x] if y in cyc_set}
                if att <= set(r):
                    side1 |= comp
                elif att <= set(s):
                    side2 |= comp
                else:
                    ok = False
                    break
            if not ok:
                continue
            e1, e2, extra = set(), set(), set()
            c4_pairs = {_pair(*g.edges[i][:2]) for i in c4}
            for i, (u, v, _) in enumerate(g.edges):
                if i in c4:
                    continue
                if absorb_parallels and _pair(u, v) in c4_pairs:
                    extra.add(i)
                elif u in side1 and v in side1:
                    e1.add(i)
                elif u in side2 and v in side2:
                    e2.add(i)
                else:
                    ok = False
                    break
            if ok:
                yield WideSeparation(
                    c4=tuple(c4), r=tuple(r), s=tuple(s),
                    g1_vertices=frozenset(side1), g1_edges=frozenset(e1),
                    g2_vertices=frozenset(side2), g2_edges=frozenset(e2),
                    c4_parallels=frozenset(extra),
                )


def find_wide_separation(g: SignedGraph, absorb_parallels: bool = False):
    return next(iter_wide_separations(g, absorb_parallels), None)


def check_wide_separation(g: SignedGraph, ws: WideSeparation) -> bool:
    """Re-check all defining conditions of a wide separation from scratch."""
    if len(ws.c4) != 4 or len(set(ws.c4)) != 4 or not all(0 <= i < g.m for i in ws.c4):
        return False
    c4_edges = [g.edges[i] for i in ws.c4]
    deg = {}
    for u, v, _ in c4_edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    if len(deg) != 4 or set(deg.values()) != {2}:
        return False
    c4_nb = {v: set() for v in deg}
    for u, v, _ in c4_edges:
        c4_nb[u].add(v)
        c4_nb[v].add(u)
    if any(len(x) != 2 for x in c4_nb.values()):
        return False
    if sum(p for _, _, p in c4_edges) % 2 != 1:
        return False
    r1, r2 = ws.r
    s1, s2 = ws.s
    if r2 in c4_nb.get(r1, ()) or s2 in c4_nb.get(s1, ()) or {r1, r2, s1, s2} != set(deg):
        return False
    for verts, edges in ((ws.g1_vertices, ws.g1_edges), (ws.g2_vertices, ws.g2_edges)):
        for i in edges:
            u, v, _ = g.edges[i]
            if u not in verts or v not in verts:
                return False
    if ws.g1_edges & set(ws.c4) or ws.g2_edges & set(ws.c4):
        return False
    c4_pairs = {_pair(u, v) for u, v, _ in c4_edges}
    for i in ws.c4_parallels:
        if i in ws.c4 or i in ws.g1_edges or i in ws.g2_edges or _pair(*g.edges[i][:2]) not in c4_pairs:
            return False
    if ws.g1_vertices & ws.g2_vertices:
        return False
    if ws.g1_vertices & set(deg) != {r1, r2} or ws.g2_vertices & set(deg) != {s1, s2}:
        return False
    if ws.g1_edges | ws.g2_edges | set(ws.c4) | ws.c4_parallels != set(range(g.m)):
        return False
    return ws.g1_vertices | ws.g2_vertices | set(deg) == set(g.vertices)


# -- partial 2-paths (unsigned) -----------------------------------------------------------------

def is_partial_2_path(g: SignedGraph) -> bool:
    """Whether a simple 2-connected graph is a subgraph of a 2-path.

    Such a graph must be outerplanar, and its inner faces must form a path
    under edge-sharing adjacency; any polygon face with at most two shared
    edges can then be triangulated into a strip.
    """
    pairs = g.pair_counts()
    if any(sum(c) > 1 for c in pairs.values()):
        raise GraphError("is_partial_2_path expects a simple graph")
    if not is_two_connected(g, allow_digon=False):
        raise GraphError("is_partial_2_path is defined here for 2-connected graphs")
    G = nx.Graph()
    G.add_nodes_from(g.vertices)
    G.add_edges_from(pairs)
    apex = 0
    H = G.copy()
    H.add_edges_from((apex, v) for v in g.vertices)
    planar, emb = nx.check_planarity(H)
    if not planar:
        return False
    emb.remove_node(apex)
    faces = []
    done = set()
    for u, v in emb.edges():
        if (u, v) in done:
            continue
        face = emb.traverse_face(u, v, mark_half_edges=done)
        faces.append(face)
    outer = [f for f in faces if len(set(f)) == g.n]
    if len(faces) == 2 and len(outer) == 2:
        return True  # a cycle
    if len(outer) != 1:
        return False
    inner = [f for f in faces if f is not outer[0]]
    edge_faces = {}
    for k, f in enumerate(inner):
        for i in range(len(f)):
            edge_faces.setdefault(_pair(f[i], f[(i + 1) % len(f)]), []).append(k)
    degree = [0] * len(inner)
    for fs in edge_faces.values():
        if len(fs) == 2:
            degree[fs[0]] += 1
            degree[fs[1]] += 1
    return all(d <= 2 for d in degree)


# -- wide 2-path traces ------------------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    kind: str
    edges: tuple
    side: tuple = None
    new_side: tuple = None
    sides: tuple = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "edges": [[u, v, "odd" if p else "even"] for u, v, p in self.edges]}
        for name in ("side", "new_side"):
            if getattr(self, name) is not None:
                d[name] = list(getattr(self, name))
        if self.sides is not None:
            d["sides"] = [list(s) for s in self.sides]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Step":
        from .graph import parse_parity
        return cls(
            kind=d["kind"],
            edges=tuple((int(u), int(v), parse_parity(p)) for u, v, p in d["edges"]),
            side=tuple(d["side"]) if "side" in d else None,
            new_side=tuple(d["new_side"]) if "new_side" in d else None,
            sides=tuple(tuple(s) for s in d["sides"]) if "sides" in d else None,
        )


@dataclass
class Wide2PathTrace:
    steps: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"steps": [s.to_dict() for s in self.steps]}

    @classmethod
    def from_dict(cls, d: dict) -> "Wide2PathTrace":
        return cls([Step.from_dict(s) for s in d["steps"]])


def _triangle_parities(edges):
    """Parity of each triangle of a 4-vertex edge list with one edge per pair."""
    par = {_pair(u, v): p for u, v, p in edges}
    vs = sorted({x for e in edges for x in e[:2]})
    out = {}
    for tri in itertools.combinations(vs, 3):
        out[tri] = sum(par[_pair(a, b)] for a, b in itertools.combinations(tri, 2)) % 2
    return out


def is_k4i_split(edges, e_pair, f_pair) -> bool:
    """K4 (6 edges, one per pair) sign-equivalent to K4^i with {e, f} a split pair."""
    vs = {x for e in edges for x in e[:2]}
    if len(vs) != 4 or len({_pair(u, v) for u, v, _ in edges}) != 6 or len(edges) != 6:
        return False
    if set(e_pair) & set(f_pair):
        return False
    tris = _triangle_parities(edges)
    if sum(tris.values()) != 2:
        return False
    for pr in (e_pair, f_pair):
        on = [p for t, p in tris.items() if set(pr) <= set(t)]
        if sorted(on) != [0, 1]:
            return False
    return True


def validate_trace(trace: Wide2PathTrace):
    """Replay a trace; return ``(graph, side_pairs)`` or raise :class:`TraceError`."""
    steps = list(trace.steps)
    if not steps:
        raise TraceError("empty trace")
    edges = []
    verts = set()
    sides = {}  # side pair -> edge index

    def add(u, v, p):
        edges.append((u, v, p))
        return len(edges) - 1

    first = steps[0]
    if first.kind == "base_triangle":
        if len(first.edges) != 3:
            raise TraceError("base triangle needs three edges")
        pairs = [_pair(u, v) for u, v, _ in first.edges]
        vs = {x for p in pairs for x in p}
        if len(vs) != 3 or len(set(pairs)) != 3:
            raise TraceError("base edges do not form a triangle")
    elif first.kind == "base_K4i":
        pairs = [_pair(u, v) for u, v, _ in first.edges]
        if first.sides is None or len(first.sides) != 2:
            raise TraceError("base K4i needs two sides")
        if not is_k4i_split(first.edges, _pair(*first.sides[0]), _pair(*first.sides[1])):
            raise TraceError("base K4i sides are not a split pair of a K4^i")
    else:
        raise TraceError(f"trace must start with a base step, not {first.kind}")
    if first.sides is None or len(first.sides) != 2:
        raise TraceError("base step needs two sides")
    side_pairs = [_pair(*s) for s in first.sides]
    if len(set(side_pairs)) != 2 or not set(side_pairs) <= set(pairs):
        raise TraceError("sides must be two distinct base edges")
    for u, v, p in first.edges:
        i = add(u, v, p)
        verts |= {u, v}
        if _pair(u, v) in side_pairs:
            sides[_pair(u, v)] = i

    for st in steps[1:]:
        if st.kind in ("base_triangle", "base_K4i"):
            raise TraceError("base step after the start")
        h = _pair(*st.side) if st.side is not None else None
        if h not in sides:
            raise TraceError(f"{st.kind} refers to {st.side}, not a current side")
        a, b = h
        if st.kind == "add_parallel":
            if len(st.edges) != 1 or _pair(*st.edges[0][:2]) != h:
                raise TraceError("parallel edge must join the ends of the side")
            add(*st.edges[0])
            continue
        new = {x for u, v, _ in st.edges for x in (u, v)} - {a, b}
        if new & verts:
            raise TraceError("glued piece reuses existing vertices")
        if st.new_side is None:
            raise TraceError("glue step needs a new side")
        e = _pair(*st.new_side)
        if st.kind == "glue_triangle":
            if len(new) != 1 or len(st.edges) != 2:
                raise TraceError("glued triangle needs one new vertex and two new edges")
            (w,) = new
            if sorted(_pair(u, v) for u, v, _ in st.edges) != sorted([_pair(w, a), _pair(w, b)]):
                raise TraceError("glued triangle edges must join the new vertex to the side ends")
            if e not in (_pair(w, a), _pair(w, b)):
                raise TraceError("new side must be an edge of the glued triangle")
        elif st.kind == "glue_K4i":
            if len(new) != 2 or len(st.edges) != 5:
                raise TraceError("glued K4i needs two new vertices and five new edges")
            w1, w2 = sorted(new)
            want = sorted([_pair(a, w1), _pair(a, w2), _pair(b, w1), _pair(b, w2), _pair(w1, w2)])
            if sorted(_pair(u, v) for u, v, _ in st.edges) != want:
                raise TraceError("glued K4i edges do not complete a K4 on the side")
            if e != _pair(w1, w2):
                raise TraceError("new side must be the edge opposite the glued side")
            piece = list(st.edges) + [edges[sides[h]]]
            if not is_k4i_split(piece, e, h):
                raise TraceError("glued K4i is not a K4^i split along the side and new side")
        else:
            raise TraceError(f"unknown step kind {st.kind!r}")
        del sides[h]
        for u, v, p in st.edges:
            i = add(u, v, p)
            if _pair(u, v) == e:
                sides[e] = i
        verts |= new
    n = max(verts)
    if verts != set(range(1, n + 1)):
        raise TraceError("vertex labels must be 1..n")
    return SignedGraph(n, edges), tuple(sorted(sides))


# -- recognition by peeling ---------------------------------------------------------------------------

def recognize_wide_2_path(g: SignedGraph, max_vertices: int = STRUCTURE_MAX_VERTICES):
    """Return a :class:`Wide2PathTrace` reproducing ``g`` exactly, or ``None``."""
    if g.n > max_vertices:
        raise SizeGuardError(f"recognition limited to {max_vertices} vertices")
    if g.n < 3:
        return None
    E = g.edges
    pair_of = [_pair(u, v) for u, v, _ in E]
    memo = {}

    def peel(alive: frozenset, F: tuple):
        key = (alive, F)
        if key in memo:
            return memo[key]
        memo[key] = None
        side_pairs = {pair_of[f] for f in F}
        extras = sorted(i for i in alive if pair_of[i] in side_pairs and i not in F)
        core = alive - set(extras)
        tail = [Step("add_parallel", (E[i],), side=pair_of[i]) for i in extras]
        verts = {x for i in core for x in pair_of[i]}
        res = None
        core_pairs = [pair_of[i] for i in core]
        by_vertex = {v: [i for i in core if v in pair_of[i]] for v in verts}
        if len(set(core_pairs)) == len(core_pairs):
            if len(verts) == 3 and len(core) == 3:
                res = [Step("base_triangle", tuple(E[i] for i in sorted(core)),
                            sides=tuple(sorted(pair_of[f] for f in F)))]
            elif len(verts) == 4 and len(core) == 6:
                if is_k4i_split([E[i] for i in core], pair_of[F[0]], pair_of[F[1]]):
                    res = [Step("base_K4i", tuple(E[i] for i in sorted(core)),
                                sides=tuple(sorted(pair_of[f] for f in F)))]
        if res is None and len(verts) > 3:
            res = _peel_triangle(core, F, verts, by_vertex) or _peel_k4(core, F, verts, by_vertex)
        if res is not None:
            res = res + tail
        memo[key] = res
        return res

    def _peel_triangle(core, F, verts, by_vertex):
        for e in F:
            x = F[0] if F[1] == e else F[1]
            for w in pair_of[e]:
                a = pair_of[e][0] if pair_of[e][1] == w else pair_of[e][1]
                inc = by_vertex[w]
                if len(inc) != 2:
                    continue
                gp = inc[0] if inc[1] == e else inc[1]
                b = pair_of[gp][0] if pair_of[gp][1] == w else pair_of[gp][1]
                if b == a or gp in F:
                    continue
                hp = _pair(a, b)
                if pair_of[x] == hp or w in pair_of[x]:
                    continue
                for h in sorted(i for i in core if pair_of[i] == hp):
                    sub = peel(core - {e, gp}, tuple(sorted((x, h))))
                    if sub is not None:
                        return sub + [Step("glue_triangle", (E[e], E[gp]), side=hp, new_side=pair_of[e])]
        return None

    def _peel_k4(core, F, verts, by_vertex):
        for e in F:
            x = F[0] if F[1] == e else F[1]
            w1, w2 = pair_of[e]
            i1, i2 = by_vertex[w1], by_vertex[w2]
            if len(i1) != 3 or len(i2) != 3:
                continue
            n1 = sorted(pair_of[i][0] if pair_of[i][1] == w1 else pair_of[i][1] for i in i1 if i != e)
            n2 = sorted(pair_of[i][0] if pair_of[i][1] == w2 else pair_of[i][1] for i in i2 if i != e)
            if n1 != n2 or len(set(n1)) != 2 or w1 in n1 or w2 in n1:
                continue
            a, b = n1
            hp = _pair(a, b)
            if pair_of[x] == hp or set(pair_of[x]) & {w1, w2}:
                continue
            cross = [i for i in i1 + i2 if i != e]
            for h in sorted(i for i in core if pair_of[i] == hp):
                piece = [E[i] for i in cross] + [E[e], E[h]]
                if not is_k4i_split(piece, pair_of[e], hp):
                    continue
                sub = peel(core - set(cross) - {e}, tuple(sorted((x, h))))
                if sub is not None:
                    new_edges = tuple(E[i] for i in sorted(cross)) + (E[e],)
                    return sub + [Step("glue_K4i", new_edges, side=hp, new_side=pair_of[e])]
        return None

    everything = frozenset(range(g.m))
    for f1, f2 in itertools.combinations(range(g.m), 2):
        if pair_of[f1] == pair_of[f2]:
            continue
        res = peel(everything, (f1, f2))
        if res is not None:
            return Wide2PathTrace(res)
    return None


# -- maximal wide 2-paths and partial wide 2-paths -------------------------------------------------------

def _sided_key(g: SignedGraph, side_pairs) -> bytes:
    labels = {(u - 1, v - 1): (c[0], c[1], int((u, v) in side_pairs)) for (u, v), c in g.pair_counts().items()}
    return canonical_form(g.n, labels)


def _with_side_parallels(steps, graph, side_pairs):
    """Add an opposite-parity parallel to each side lacking one."""
    out = list(steps)
    counts = graph.pair_counts()
    for sp in side_pairs:
        ce, co = counts[sp]
        if ce == 0:
            out.append(Step("add_parallel", ((sp[0], sp[1], EVEN),), side=sp))
        if co == 0:
            out.append(Step("add_parallel", ((sp[0], sp[1], ODD),), side=sp))
    return out


@lru_cache(maxsize=None)
def _sided_maximal(n: int) -> tuple:
    """Sided wide 2-paths on n vertices whose side pairs are always doubled (even+odd).

    Returned as tuples ``(steps, side_pairs)``, one per class up to
    relabelling and re-signing with sides marked.
    """
    if n < 3:
        return ()
    found = {}

    def record(steps):
        tr = Wide2PathTrace(steps)
        g, sides = validate_trace(tr)
        steps = _with_side_parallels(steps, g, sides)
        g, sides = validate_trace(Wide2PathTrace(steps))
        found.setdefault(_sided_key(g, set(sides)), (tuple(steps), sides))

    if n == 3:
        for ps in itertools.product((EVEN, ODD), repeat=3):
            record([Step("base_triangle", ((1, 2, ps[0]), (1, 3, ps[1]), (2, 3, ps[2])), sides=((1, 2), (1, 3)))])
    if n == 4:
        base = tuple((u, v, p) for u, v, p in PATTERN_K4I.edges)
        record([Step("base_K4i", base, sides=((1, 3), (2, 4)))])
    for prev_n, grow in ((n - 1, "triangle"), (n - 2, "k4")):
        if prev_n < 3:
            continue
        for steps, sides in _sided_maximal(prev_n):
            g, _ = validate_trace(Wide2PathTrace(list(steps)))
            for h in sides:
                a, b = h
                if grow == "triangle":
                    w = prev_n + 1
                    for p1, p2, end in itertools.product((EVEN, ODD), (EVEN, ODD), (a, b)):
                        st = Step("glue_triangle", ((w, a, p1), (w, b, p2)), side=h, new_side=_pair(w, end))
                        record(list(steps) + [st])
                else:
                    w1, w2 = prev_n + 1, prev_n + 2
                    for ps in itertools.product((EVEN, ODD), repeat=5):
                        new = ((a, w1, ps[0]), (a, w2, ps[1]), (b, w1, ps[2]), (b, w2, ps[3]), (w1, w2, ps[4]))
                        st = Step("glue_K4i", new, side=h, new_side=(w1, w2))
                        try:
                            record(list(steps) + [st])
                        except TraceError:
                            continue
    return tuple(found[k] for k in sorted(found))


PATTERN_K4I = SignedGraph(4, [(1, 2, ODD), (1, 3, EVEN), (1, 4, EVEN), (2, 3, EVEN), (2, 4, EVEN), (3, 4, EVEN)])


@lru_cache(maxsize=None)
def maximal_wide_2_paths(n: int) -> tuple:
    """Unsided maximal wide 2-paths on n vertices: ``(graph, trace)`` pairs."""
    out = {}
    for steps, _ in _sided_maximal(n):
        g, _ = validate_trace(Wide2PathTrace(list(steps)))
        out.setdefault(canonical_key(g), (g, Wide2PathTrace(list(steps))))
    return tuple(out[k] for k in sorted(out))


def _requirement_labels(g: SignedGraph) -> dict:
    """Pairs with two or more edges need a doubled (side) pair in any completion."""
    out = {}
    for (u, v), (ce, co) in g.pair_counts().items():
        out[(u - 1, v - 1)] = (1, 1) if ce + co >= 2 else (ce, co)
    return out


def _embed_spanning(g: SignedGraph, W: SignedGraph):
    """Find vertex bijection and re-signing placing ``g`` inside ``W`` (multiplicities via side doubling).

    Returns ``(mapping, resign_set)`` or ``None``. ``W``'s doubled pairs accept
    any edges of ``g``; its single pairs accept one edge of the same parity.
    """
    greq = {(a + 1, b + 1): lab for (a, b), lab in _requirement_labels(g).items()}
    wl = {p: (min(c[0], 1), min(c[1], 1)) for p, c in W.pair_counts().items()}
    gnb = g.neighbors()
    wnb = W.neighbors()
    gdeg = {v: len(gnb[v]) for v in g.vertices}
    wdeg = {v: len(wnb[v]) for v in W.vertices}
    order = sorted(g.vertices, key=lambda v: (-gdeg[v], v))
    mapping = {}
    used = set()

    def ok_pair(req, have):
        if have is None:
            return False
        if req == (1, 1):
            return have == (1, 1)
        return True

    def rec(i):
        if i == len(order):
            dsu = _ParityDSU(list(g.vertices))
            for (a, b), req in greq.items():
                have = wl[_pair(mapping[a], mapping[b])]
                if have == (1, 1):
                    continue
                gp = 0 if req[0] else 1
                wp = 0 if have[0] else 1
                if not dsu.union(a, b, gp ^ wp):
                    return None
            return dict(mapping), dsu.assignment()
        v = order[i]
        for t in W.vertices:
            if t in used or wdeg[t] < gdeg[v]:
                continue
            good = True
            for u in gnb[v]:
                if u in mapping and not ok_pair(greq[_pair(u, v)], wl.get(_pair(mapping[u], t))):
                    good = False
                    break
            if not good:
                continue
            mapping[v] = t
            used.add(t)
            res = rec(i + 1)
            if res is not None:
                return res
            used.discard(t)
            del mapping[v]
        return None

    return rec(0)


def is_partial_wide_2_path(g: SignedGraph, max_vertices: int = STRUCTURE_MAX_VERTICES,
                           reduce: bool = False):
    """Find a wide 2-path on the same vertices containing ``g`` as a spanning subgraph.

    With ``reduce`` the test is applied to ``g`` with one edge kept per pair and parity.

    Returns ``(trace, mapping, resign_set)`` where replaying ``trace`` gives
    the completion, ``mapping`` sends vertices of ``g`` to vertices of the
    completion and ``g`` must be re-signed on ``resign_set`` first; or
    ``None`` if no completion exists.
    """
    if g.n > max_vertices:
        raise SizeGuardError(f"completion search limited to {max_vertices} vertices")
    if reduce:
        g = reduce_parallel_classes(g)[0]
    if g.n < 3:
        return None
    for W, trace in maximal_wide_2_paths(g.n):
        hit = _embed_spanning(g, W)
        if hit is None:
            continue
        mapping, U = hit
        steps = _extra_parallels(trace.steps, g, mapping, U, W)
        return Wide2PathTrace(steps), mapping, U
    return None


def _extra_parallels(steps, g, mapping, U, W):
    """Insert parallel-edge steps so the completion literally contains resigned, relabelled ``g``."""
    h = resign(g, U)
    need = {}
    for u, v, p in h.edges:
        key = _pair(mapping[u], mapping[v])
        need.setdefault(key, [0, 0])[p] += 1
    have = W.pair_counts()
    extra = {}
    for key, (ne, no) in need.items():
        he, ho = have[key]
        if ne > he or no > ho:
            extra[key] = (max(0, ne - he), max(0, no - ho))
    if not extra:
        return list(steps)
    out = []
    for st in steps:
        out.append(st)
        born = []
        if st.kind.startswith("base"):
            born = [_pair(*s) for s in st.sides]
        elif st.kind.startswith("glue"):
            born = [_pair(*st.new_side)]
        for sp in born:
            if sp in extra:
                ke, ko = extra.pop(sp)
                out += [Step("add_parallel", ((sp[0], sp[1], EVEN),), side=sp)] * ke
                out += [Step("add_parallel", ((sp[0], sp[1], ODD),), side=sp)] * ko
    if extra:
        raise AssertionError("doubled pair of a completion was never a side")
    return out


def check_completion(g: SignedGraph, trace, mapping, U) -> bool:
    """Independent check that ``g`` is a spanning subgraph of the replayed completion."""
    try:
        W, _ = validate_trace(trace)
    except TraceError:
        return False
    if W.n != g.n or sorted(mapping) != list(g.vertices) or sorted(mapping.values()) != list(W.vertices):
        return False
    h = resign(g, U)
    have = {}
    for u, v, p in W.edges:
        have[(_pair(u, v), p)] = have.get((_pair(u, v), p), 0) + 1
    for u, v, p in h.edges:
        k = (_pair(mapping[u], mapping[v]), p)
        if have.get(k, 0) == 0:
            return False
        have[k] -= 1
    return True


class PartialWideTable:
    """Keys of all 2-connected partial wide 2-paths, by downward closure from maximal ones.

    Lookup uses the requirement form of a graph: pairs carrying two or more
    edges must land on a doubled pair of the completion.
    """

    def __init__(self):
        self.keys = {}

    def _closure(self, n):
        if n in self.keys:
            return self.keys[n]
        seen = set()
        stack = []
        for W, _ in maximal_wide_2_paths(n):
            labels = {(u - 1, v - 1): (min(c[0], 1), min(c[1], 1)) for (u, v), c in W.pair_counts().items()}
            stack.append(labels)
        while stack:
            labels = stack.pop()
            k = canonical_form(n, labels)
            if k in seen:
                continue
            seen.add(k)
            for pair, (ce, co) in labels.items():
                if (ce, co) == (1, 1):
                    for lab in ((1, 0), (0, 1)):
                        new = dict(labels)
                        new[pair] = lab
                        stack.append(new)
                else:
                    new = dict(labels)
                    del new[pair]
                    if _labels_two_connected(n, new):
                        stack.append(new)
        self.keys[n] = seen
        return seen

    def contains(self, g: SignedGraph, reduce: bool = False) -> bool:
        if reduce:
            g = reduce_parallel_classes(g)[0]
        if g.n < 3:
            return False
        return canonical_form(g.n, _requirement_labels(g)) in self._closure(g.n)


def _labels_two_connected(n, labels) -> bool:
    nb = {v: set() for v in range(n)}
    for a, b in labels:
        nb[a].add(b)
        nb[b].add(a)

    def connected(skip):
        vs = [v for v in range(n) if v != skip]
        seen = {vs[0]}
        stack = [vs[0]]
        while stack:
            x = stack.pop()
            for y in nb[x]:
                if y != skip and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(vs)

    return connected(None) and all(connected(v) for v in range(n))


# -- the signed 4-wheel class and split pairs -------------------------------------------------------------

_W4O_KEY = canonical_key(w4o())


def structure_flag(g: SignedGraph, table: "PartialWideTable" = None) -> bool:
    """Same-parity reduced ``g`` is a partial wide 2-path, or ``g`` is in the W4o class."""
    if is_w4o_class(g):
        return True
    if table is not None:
        return table.contains(g, reduce=True)
    return is_partial_wide_2_path(g, reduce=True) is not None


def is_w4o_class(g: SignedGraph) -> bool:
    """Single-parity parallel classes that collapse to a re-signed, relabelled W4o."""
    reduced, uniform = reduce_parallel_classes(g)
    return uniform and reduced.n == 5 and canonical_key(reduced) == _W4O_KEY


def find_split_pairs(g: SignedGraph) -> list:
    """Nonadjacent edge pairs (as index pairs) of a K4 whose edges each lie on an even and an odd triangle."""
    pairs = g.pair_counts()
    if g.n != 4 or g.m != 6 or len(pairs) != 6:
        raise GraphError("split pairs are defined on a K4 occurrence")
    tris = _triangle_parities(g.edges)
    out = []
    for i, j in itertools.combinations(range(6), 2):
        pi, pj = _pair(*g.edges[i][:2]), _pair(*g.edges[j][:2])
        if set(pi) & set(pj):
            continue
        if all(sorted(p for t, p in tris.items() if set(pr) <= set(t)) == [0, 1] for pr in (pi, pj)):
            out.append((i, j))
    return out


def random_wide_2_path(n: int, rng) -> tuple:
    """Random wide 2-path on ``n >= 3`` vertices as ``(graph, trace)``.

    ``rng`` is a ``numpy.random.Generator``. Pieces are glued on random sides,
    with occasional parallel side edges.
    """
    if n < 3:
        raise GraphError("wide 2-paths have at least three vertices")
    bit = lambda: int(rng.integers(2))
    if n >= 4 and rng.random() < 0.3:
        steps = [Step("base_K4i", tuple(PATTERN_K4I.edges), sides=((1, 3), (2, 4)))]
        size = 4
    else:
        steps = [Step("base_triangle", ((1, 2, bit()), (1, 3, bit()), (2, 3, bit())), sides=((1, 2), (1, 3)))]
        size = 3
    _, sides = validate_trace(Wide2PathTrace(steps))
    sides = list(sides)
    while size < n:
        h = sides[int(rng.integers(2))]
        a, b = h
        if rng.random() < 0.2:
            steps.append(Step("add_parallel", ((a, b, bit()),), side=h))
            continue
        if size + 2 <= n and rng.random() < 0.3:
            w1, w2 = size + 1, size + 2
            while True:
                new = ((a, w1, bit()), (a, w2, bit()), (b, w1, bit()), (b, w2, bit()), (w1, w2, bit()))
                st = Step("glue_K4i", new, side=h, new_side=(w1, w2))
                try:
                    validate_trace(Wide2PathTrace(steps + [st]))
                    break
                except TraceError:
                    continue
            size += 2
        else:
            w = size + 1
            end = (a, b)[int(rng.integers(2))]
            st = Step("glue_triangle", ((w, a, bit()), (w, b, bit())), side=h, new_side=_pair(w, end))
            size += 1
        steps.append(st)
        _, sides = validate_trace(Wide2PathTrace(steps))
        sides = list(sides)
    trace = Wide2PathTrace(steps)
    return validate_trace(trace)[0], trace
