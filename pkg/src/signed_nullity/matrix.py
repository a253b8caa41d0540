"""Matrices in S(G, Sigma): membership, nullity, the Strong Arnold Property, and nullity search."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import least_squares

from .graph import SignedGraph

RANK_TOL = 1e-9
MEMBERSHIP_EPS = 1e-8
SEARCH_MARGIN = 1e-3   # sign entries must stay this far from zero, relative to the largest entry
BATCH = 256
POLISH_GATE = 1e-10      # only restarts whose eigenvalue window is this tight get a least-squares polish
POLISH_PER_BATCH = 8


class MatrixError(ValueError):
    pass


# pattern codes
ZERO, NEG, POS, FREE = 0, -1, 1, 2


def pattern_codes(g: SignedGraph) -> np.ndarray:
    """n x n array of entry classes: ZERO, NEG (only even edges), POS (only odd), FREE."""
    codes = np.full((g.n, g.n), ZERO, dtype=int)
    np.fill_diagonal(codes, FREE)
    for (u, v), (ce, co) in g.pair_counts().items():
        c = FREE if ce and co else (NEG if ce else POS)
        codes[u - 1, v - 1] = codes[v - 1, u - 1] = c
    return codes


@dataclass
class PatternMatrix:
    a: np.ndarray
    graph: SignedGraph
    tol: float = RANK_TOL
    exact: list = None   # optional rows of Fractions

    def to_dict(self) -> dict:
        rows = self.exact if self.exact is not None else self.a.tolist()
        return {"matrix": [[_entry_out(x) for x in r] for r in rows], "graph": self.graph.to_dict()}


@dataclass
class NullityCertificate:
    matrix: PatternMatrix
    kernel_basis: np.ndarray
    residuals: float
    nullity: int
    restart: int = None

    def to_dict(self) -> dict:
        d = self.matrix.to_dict()
        d.update(nullity=self.nullity, residual=float(self.residuals),
                 kernel_basis=self.kernel_basis.T.tolist(), restart=self.restart)
        return d


@dataclass
class SapReport:
    dimension: int
    basis: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.dimension == 0

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "sap": self.holds, "basis": [x.tolist() for x in self.basis]}


def _as_array(a) -> np.ndarray:
    arr = np.array([[float(x) for x in row] for row in a], dtype=float) if isinstance(a, list) else np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise MatrixError("matrix must be square")
    return arr


def _check_symmetric(a: np.ndarray):
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > 1e-12 * scale:
        raise MatrixError("matrix is not symmetric")


def validate_membership(a, g: SignedGraph, eps: float = MEMBERSHIP_EPS) -> bool:
    """Whether ``a`` lies in S(g) with margin ``eps`` after scaling the largest entry to 1."""
    a = _as_array(a)
    if a.shape[0] != g.n:
        raise MatrixError(f"matrix is {a.shape[0]}x{a.shape[0]} but graph has {g.n} vertices")
    _check_symmetric(a)
    scale = np.abs(a).max()
    b = a / scale if scale > 0 else a
    codes = pattern_codes(g)
    off = ~np.eye(g.n, dtype=bool)
    if np.any(np.abs(b[(codes == ZERO) & off]) > eps):
        return False
    if np.any(b[codes == NEG] >= -eps) or np.any(b[codes == POS] <= eps):
        return False
    return True


def nullity(a, tol: float = RANK_TOL, graph: SignedGraph = None) -> NullityCertificate:
    """Numerical nullity: eigenvalues with ``|lambda| <= tol * max|lambda|`` (all of them for the zero matrix)."""
    a = _as_array(a)
    _check_symmetric(a)
    w, v = np.linalg.eigh((a + a.T) / 2)
    top = np.abs(w).max() if w.size else 0.0
    small = np.abs(w) <= tol * top if top > 0 else np.ones(w.size, dtype=bool)
    basis = v[:, small]
    res = float(np.linalg.norm(a @ basis, axis=0).max()) if basis.size else 0.0
    g = graph if graph is not None else SignedGraph(a.shape[0])
    return NullityCertificate(PatternMatrix(a, g, tol), basis, res, int(small.sum()))


def sap_check(a, g: SignedGraph, tol: float = RANK_TOL, eps: float = MEMBERSHIP_EPS) -> SapReport:
    """Dimension of symmetric X supported on non-adjacent pairs with AX = 0."""
    a = _as_array(a)
    if not validate_membership(a, g, eps):
        raise MatrixError("matrix is not in S(G, Sigma)")
    n = g.n
    adjacent = set(g.pair_counts())
    free = [(i, j) for i in range(n) for j in range(i + 1, n) if (i + 1, j + 1) not in adjacent]
    if not free:
        return SapReport(0)
    cols = []
    for i, j in free:
        x = np.zeros((n, n))
        x[i, j] = x[j, i] = 1.0
        cols.append((a @ x).ravel())
    L = np.array(cols).T
    s = np.linalg.svd(L, compute_uv=False)
    scale = np.linalg.norm(a, 2)
    if scale == 0:
        rank = 0
    else:
        rank = int((s > tol * scale).sum())
    dim = len(free) - rank
    basis = []
    if dim:
        _, _, vt = np.linalg.svd(L)
        for row in vt[rank:]:
            x = np.zeros((n, n))
            for c, (i, j) in zip(row, free):
                x[i, j] = x[j, i] = c
            basis.append(x)
    return SapReport(dim, basis)


# -- search ---------------------------------------------------------------------------------------------

class _Layout:
    """Free parameters of S(g): the diagonal, then one value per adjacent pair."""

    def __init__(self, g: SignedGraph):
        self.n = g.n
        codes = pattern_codes(g)
        self.pairs = [(i, j) for i in range(g.n) for j in range(i + 1, g.n) if codes[i, j] != ZERO]
        self.sign = np.array([codes[i, j] if codes[i, j] != FREE else 0 for i, j in self.pairs], dtype=float)
        self.rows = np.array([p[0] for p in self.pairs], dtype=int)
        self.cols = np.array([p[1] for p in self.pairs], dtype=int)

    def build(self, diag, off):
        """Batched assembly: diag (B, n), off (B, p) -> (B, n, n)."""
        B = diag.shape[0]
        a = np.zeros((B, self.n, self.n))
        idx = np.arange(self.n)
        a[:, idx, idx] = diag
        a[:, self.rows, self.cols] = off
        a[:, self.cols, self.rows] = off
        return a


def _window_objective(w, v, k):
    """Tightest window of k sorted eigenvalues: spread and its gradient direction."""
    B, n = w.shape
    best = np.full(B, np.inf)
    grad = np.zeros((B, n, n))
    for s in range(n - k + 1):
        win = w[:, s:s + k]
        dev = win - win.mean(axis=1, keepdims=True)
        spread = (dev ** 2).sum(axis=1)
        better = spread < best
        if better.any():
            best = np.where(better, spread, best)
            vs = v[:, :, s:s + k]
            g = 2 * np.einsum("bik,bk,bjk->bij", vs, dev, vs)
            grad[better] = g[better]
    return best, grad


def _restart_init(lay: _Layout, seed: int, index: int):
    rng = np.random.default_rng([seed, index])
    diag = rng.normal(size=lay.n)
    off = rng.normal(size=len(lay.pairs))
    signed = lay.sign != 0
    off[signed] = lay.sign[signed] * rng.uniform(0.1, 1.0, size=signed.sum())
    return diag, off


def _project(diag, off, lay, margin):
    scale = np.abs(off).max(axis=1, keepdims=True) if off.shape[1] else np.ones((diag.shape[0], 1))
    scale = np.where(scale > 0, scale, 1.0)
    diag = diag / scale
    off = off / scale
    signed = lay.sign != 0
    off[:, signed] = lay.sign[signed] * np.maximum(lay.sign[signed] * off[:, signed], margin)
    return diag, off


def _descend(lay, diag, off, k, margin, iters=300, lr=0.05):
    """Projected gradient on the normalised eigenvalue-window spread, batched over restarts."""
    diag, off = _project(diag, off, lay, margin)
    m1 = np.zeros_like(off), np.zeros_like(diag)
    m2 = np.zeros_like(off), np.zeros_like(diag)
    b1, b2 = 0.9, 0.999
    for t in range(1, iters + 1):
        a = lay.build(diag, off)
        w, v = np.linalg.eigh(a)
        spread, gA = _window_objective(w, v, k)
        dev = a - (np.trace(a, axis1=1, axis2=2) / lay.n)[:, None, None] * np.eye(lay.n)
        norm2 = (dev ** 2).sum(axis=(1, 2))
        f = spread / norm2
        gA = gA / norm2[:, None, None] - 2 * (f / norm2)[:, None, None] * dev
        g_off = 2 * gA[:, lay.rows, lay.cols]
        g_diag = np.diagonal(gA, axis1=1, axis2=2)
        steps = []
        for j, gr in enumerate((g_off, g_diag)):
            m1[j][...] = b1 * m1[j] + (1 - b1) * gr
            m2[j][...] = b2 * m2[j] + (1 - b2) * gr ** 2
            steps.append(lr * (m1[j] / (1 - b1 ** t)) / (np.sqrt(m2[j] / (1 - b2 ** t)) + 1e-12))
        off = off - steps[0]
        diag = diag - steps[1]
        diag, off = _project(diag, off, lay, margin)
    a = lay.build(diag, off)
    w, v = np.linalg.eigh(a)
    spread, _ = _window_objective(w, v, k)
    dev = a - (np.trace(a, axis1=1, axis2=2) / lay.n)[:, None, None] * np.eye(lay.n)
    return diag, off, spread / (dev ** 2).sum(axis=(1, 2))


def _shift_to_kernel(a, k):
    w, v = np.linalg.eigh(a)
    best, s_best = np.inf, 0
    for s in range(len(w) - k + 1):
        sp = np.ptp(w[s:s + k])
        if sp < best:
            best, s_best = sp, s
    mu = w[s_best:s_best + k].mean()
    return a - mu * np.eye(len(a)), v[:, s_best:s_best + k]


def _polish(lay, a, k, margin):
    """Bounded least squares on (A, Z) with A Z = 0, Z^T Z = I and fixed off-diagonal scale."""
    a, z = _shift_to_kernel(a, k)
    n, p = lay.n, len(lay.pairs)
    off0 = a[lay.rows, lay.cols]
    c0 = float(off0 @ off0)
    x0 = np.concatenate([np.diag(a), off0, z.ravel()])
    lo = np.full(x0.size, -np.inf)
    hi = np.full(x0.size, np.inf)
    bound = margin * np.abs(off0).max()
    for j, s in enumerate(lay.sign):
        if s > 0:
            lo[n + j] = bound
        elif s < 0:
            hi[n + j] = -bound
    x0 = np.clip(x0, lo + 1e-15, hi - 1e-15)
    iu = np.triu_indices(k)

    def resid(x):
        A = lay.build(x[None, :n], x[None, n:n + p])[0]
        Z = x[n + p:].reshape(n, k)
        return np.concatenate([(A @ Z).ravel(), (Z.T @ Z - np.eye(k))[iu], [(x[n:n + p] @ x[n:n + p] - c0) / c0]])

    sol = least_squares(resid, x0, bounds=(lo, hi), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
    return lay.build(sol.x[None, :n], sol.x[None, n:n + p])[0]


def _accept(a, g, k, tol, margin, need_sap):
    scale = np.abs(a).max()
    if scale == 0:
        b = a
    else:
        b = a / scale
    if not validate_membership(b, g, margin):
        return None
    cert = nullity(b, tol, g)
    if cert.nullity < k:
        return None
    if need_sap and not sap_check(b, g, tol, margin).holds:
        return None
    return cert


def _search(g: SignedGraph, k: int, budget: int, seed: int, tol: float, need_sap: bool,
            margin: float = SEARCH_MARGIN, iters: int = 300, batch: int = BATCH):
    if k <= 0:
        return nullity(np.zeros((g.n, g.n)), tol, g)
    if k > g.n:
        return None
    lay = _Layout(g)
    if not (lay.sign != 0).any():
        # no sign-constrained pairs: the zero matrix belongs to S(g)
        cert = _accept(np.zeros((g.n, g.n)), g, k, tol, margin, need_sap)
        if cert is not None:
            cert.restart = 0
            return cert
    if not lay.pairs:
        return None
    for start in range(0, budget, batch):
        idx = range(start, min(start + batch, budget))
        inits = [_restart_init(lay, seed, i) for i in idx]
        diag = np.array([d for d, _ in inits])
        off = np.array([o for _, o in inits])
        diag, off, f = _descend(lay, diag, off, k, margin, iters)
        for rank, local in enumerate(np.argsort(f, kind="stable")):
            if f[local] > POLISH_GATE or rank >= POLISH_PER_BATCH:
                break
            a = lay.build(diag[local:local + 1], off[local:local + 1])[0]
            a, _ = _shift_to_kernel(a, k)
            cert = _accept(a, g, k, tol, margin, need_sap)
            clamped = np.abs(off[local][lay.sign != 0]) <= 2 * margin
            if cert is None and not clamped.any():
                # restarts pinned to the sign margin sit on the boundary of S(g); polishing cannot leave it
                cert = _accept(_polish(lay, a, k, margin), g, k, tol, margin, need_sap)
            if cert is not None:
                cert.restart = idx[local]
                return cert
    return None


def max_nullity_search(g: SignedGraph, k: int, budget: int = 1000, seed: int = 0,
                       tol: float = RANK_TOL, **kw):
    """Randomised search for a member of S(g) with nullity >= k; ``None`` once the budget is spent."""
    return _search(g, k, budget, seed, tol, need_sap=False, **kw)


def xi_search(g: SignedGraph, k: int, budget: int = 1000, seed: int = 0, tol: float = RANK_TOL, **kw):
    """As :func:`max_nullity_search`, but the matrix must also have the Strong Arnold Property."""
    cert = _search(g, k, budget, seed, tol, need_sap=True, **kw)
    if cert is None:
        return None
    return cert, sap_check(cert.matrix.a, g, tol, kw.get("margin", SEARCH_MARGIN))


# -- exact arithmetic -----------------------------------------------------------------------------------

def exact_rank(rows) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    # clear denominators row by row so the elimination stays in the integers
    ints = []
    for r in m:
        den = 1
        for x in r:
            den = den * x.denominator // _gcd(den, x.denominator)
        ints.append([int(x * den) for x in r])
    if not ints:
        return 0
    nrows, ncols = len(ints), len(ints[0])
    rank, prev = 0, 1
    for c in range(ncols):
        piv = next((i for i in range(rank, nrows) if ints[i][c] != 0), None)
        if piv is None:
            continue
        ints[rank], ints[piv] = ints[piv], ints[rank]
        p = ints[rank][c]
        for i in range(rank + 1, nrows):
            ints[i] = [(p * ints[i][j] - ints[i][c] * ints[rank][j]) // prev for j in range(ncols)]
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def exact_nullity(rows) -> int:
    return len(rows) - exact_rank(rows)


def exact_membership(rows, g: SignedGraph) -> bool:
    codes = pattern_codes(g)
    n = g.n
    if len(rows) != n or any(len(r) != n for r in rows):
        return False
    for i in range(n):
        for j in range(n):
            x = Fraction(rows[i][j])
            if x != Fraction(rows[j][i]):
                return False
            c = codes[i, j]
            if (c == ZERO and x != 0) or (c == NEG and x >= 0) or (c == POS and x <= 0):
                return False
    return True


# frozen fixtures found once by a rational kernel-frame search, verified exactly in the tests
_FROZEN = {
    "W4o": [["1", "-1", "0", "3", "-2"], ["-1", "-2", "2", "0", "-3"], ["0", "2", "3", "-2", "-1"],
            ["3", "0", "-2", "6", "-1"], ["-2", "-3", "-1", "-1", "0"]],
    "K23i": [["-4", "0", "2", "-3/2", "-3"], ["0", "7", "-1", "-3/2", "-3"], ["2", "-1", "3", "0", "0"],
             ["-3/2", "-3/2", "0", "0", "0"], ["-3", "-3", "0", "0", "0"]],
}


def fixture_names() -> list:
    return [f"K{n}{p}" for n in range(2, 9) for p in "eo"] + ["K2eq", "K3eq", "K23e", "K4i", "W4o", "K23i"]


def fixture_matrix(name: str) -> PatternMatrix:
    """Exact witness matrix for a named graph (K_n^e/o, K2eq, K3eq, K23e, K4i, W4o, K23i)."""
    from .minors import PATTERNS
    if name not in fixture_names():
        raise KeyError(f"no fixture for {name!r}")
    g = PATTERNS[name]
    n = g.n
    if name in _FROZEN:
        rows = [[Fraction(x) for x in r] for r in _FROZEN[name]]
    elif name in ("K2eq", "K3eq"):
        rows = [[Fraction(0)] * n for _ in range(n)]
    elif name == "K23e":
        # zero within the parts, -1 across: rank 2
        rows = [[Fraction(-1) if (i < 2) != (j < 2) else Fraction(0) for j in range(n)] for i in range(n)]
    elif name == "K4i":
        # -J + v v^T with v = (2, 2, 0, 0); entry 12 becomes +3 for the odd edge
        v = [2, 2, 0, 0]
        rows = [[Fraction(-1 + v[i] * v[j]) for j in range(n)] for i in range(n)]
    else:
        s = -1 if name.endswith("e") else 1
        rows = [[Fraction(s)] * n for _ in range(n)]
    a = np.array([[float(x) for x in r] for r in rows])
    return PatternMatrix(a, g, RANK_TOL, rows)


# -- I/O ----------------------------------------------------------------------------------------------

def _entry_out(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    return float(x)


def parse_matrix(data):
    """Rows of numbers or ``"p/q"`` strings; returns ``(float array, exact rows or None)``."""
    if isinstance(data, dict):
        data = data["matrix"]
    exact = []
    for r in data:
        row = []
        for x in r:
            if isinstance(x, str):
                row.append(Fraction(x))
            elif isinstance(x, int):
                row.append(Fraction(x))
            else:
                row = None
                break
        if row is None:
            exact = None
            break
        exact.append(row)
    arr = _as_array([[float(Fraction(x)) if isinstance(x, str) else float(x) for x in r] for r in data])
    return arr, exact


def load_matrix(path):
    with open(path) as fh:
        return parse_matrix(json.load(fh))


def dump_matrix(rows, path):
    with open(path, "w") as fh:
        json.dump({"matrix": [[_entry_out(x) for x in r] for r in rows]}, fh, indent=1)
        fh.write("\n")
