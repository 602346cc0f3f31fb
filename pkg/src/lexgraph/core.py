"""Graph and label containers plus the gradient / lexicographic primitives.

Vertices are dense 0-based integers. Undirected edges are stored once in a
canonical (min, max) orientation; parallel edges collapse to the minimum
length and self-loops are rejected at build time. All containers are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

DEFAULT_TOL = 1e-9

#: Free-vertex marker in label arrays.
FREE = float("nan")


class LexgraphError(Exception):
    pass


class GraphFormatError(LexgraphError):
    """Bad graph data: self loop, non-positive or non-finite length, bad ids."""


class MissingValueError(LexgraphError):
    """An operation needed a concrete value at a vertex that is free."""


class NotWellPosedError(LexgraphError):
    def __init__(self, report: "WellPosednessReport"):
        self.report = report
        super().__init__(f"instance is not well-posed: {report.describe()}")


class NoTerminalPathError(LexgraphError):
    """No terminal path exists through the requested vertex."""


class SizeGuardError(LexgraphError):
    """A desk-scale oracle was invoked beyond its size guard."""


def rel_scale(a: float, b: float) -> float:
    return max(1.0, abs(a), abs(b))


def values_close(a: float, b: float, tol: float = DEFAULT_TOL) -> bool:
    return abs(a - b) <= tol * rel_scale(a, b)


def definitely_greater(a: float, b: float, tol: float = DEFAULT_TOL) -> bool:
    """True iff a > b strictly, beyond the shared relative tolerance."""
    return a - b > tol * rel_scale(a, b)


class Graph:
    """Weighted graph with positive finite edge lengths.

    Parameters are validated eagerly; adjacency indexes are built lazily and
    cached. ``edge_u``/``edge_v``/``edge_len`` define the fixed edge order
    used by gradient vectors.
    """

    __slots__ = (
        "n",
        "directed",
        "edge_u",
        "edge_v",
        "edge_len",
        "_out_indptr",
        "_out_head",
        "_out_eid",
        "_in_indptr",
        "_in_head",
        "_in_eid",
        "_adj_lists",
        "_in_adj_lists",
        "_edge_lookup",
    )

    def __init__(self, n: int, edges: Iterable[tuple[int, int, float]], directed: bool = False):
        if n < 0:
            raise GraphFormatError("vertex count must be nonnegative")
        self.n = int(n)
        self.directed = bool(directed)

        dedup: dict[tuple[int, int], float] = {}
        for u, v, length in edges:
            u = int(u)
            v = int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            length = float(length)
            if not np.isfinite(length) or length <= 0.0:
                raise GraphFormatError(f"edge ({u},{v}) has invalid length {length!r}")
            key = (u, v) if directed or u < v else (v, u)
            prev = dedup.get(key)
            if prev is None or length < prev:
                dedup[key] = length

        keys = sorted(dedup)
        self.edge_u = np.array([k[0] for k in keys], dtype=np.int64)
        self.edge_v = np.array([k[1] for k in keys], dtype=np.int64)
        self.edge_len = np.array([dedup[k] for k in keys], dtype=np.float64)
        for arr in (self.edge_u, self.edge_v, self.edge_len):
            arr.setflags(write=False)
        self._out_indptr = None
        self._in_indptr = None
        self._adj_lists = None
        self._in_adj_lists = None
        self._edge_lookup = None

    @property
    def m(self) -> int:
        return int(self.edge_u.shape[0])

    def _build_csr(self, reverse: bool):
        if self.directed:
            src = self.edge_v if reverse else self.edge_u
            dst = self.edge_u if reverse else self.edge_v
            eid = np.arange(self.m, dtype=np.int64)
        else:
            src = np.concatenate([self.edge_u, self.edge_v])
            dst = np.concatenate([self.edge_v, self.edge_u])
            eid = np.concatenate([np.arange(self.m, dtype=np.int64)] * 2)
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, dst[order], eid[order]

    def _out_csr(self):
        if self._out_indptr is None:
            self._out_indptr, self._out_head, self._out_eid = self._build_csr(False)
        return self._out_indptr, self._out_head, self._out_eid

    def _in_csr(self):
        if not self.directed:
            return self._out_csr()
        if self._in_indptr is None:
            self._in_indptr, self._in_head, self._in_eid = self._build_csr(True)
        return self._in_indptr, self._in_head, self._in_eid

    def adjacency_lists(self, reverse: bool = False) -> list[list[tuple[int, float]]]:
        """Plain-list adjacency (neighbor, length), cached; heap Dijkstra uses this."""
        if reverse and self.directed:
            if self._in_adj_lists is None:
                self._in_adj_lists = self._to_lists(*self._in_csr())
            return self._in_adj_lists
        if self._adj_lists is None:
            self._adj_lists = self._to_lists(*self._out_csr())
        return self._adj_lists

    def _to_lists(self, indptr, head, eid):
        lens = self.edge_len[eid]
        out: list[list[tuple[int, float]]] = []
        head_l = head.tolist()
        lens_l = lens.tolist()
        ptr = indptr.tolist()
        for x in range(self.n):
            out.append(list(zip(head_l[ptr[x]:ptr[x + 1]], lens_l[ptr[x]:ptr[x + 1]])))
        return out

    def edge_between(self, u: int, v: int) -> Optional[tuple[int, float]]:
        """(edge id, length) of edge u->v (any orientation if undirected)."""
        if self._edge_lookup is None:
            lookup: dict[tuple[int, int], tuple[int, float]] = {}
            for i in range(self.m):
                a, b, w = int(self.edge_u[i]), int(self.edge_v[i]), float(self.edge_len[i])
                lookup[(a, b)] = (i, w)
                if not self.directed:
                    lookup[(b, a)] = (i, w)
            self._edge_lookup = lookup
        return self._edge_lookup.get((int(u), int(v)))

    def reversed(self) -> "Graph":
        if not self.directed:
            return self
        return Graph(self.n, zip(self.edge_v.tolist(), self.edge_u.tolist(), self.edge_len.tolist()), directed=True)

    def with_edge_mask(self, mask: np.ndarray) -> "Graph":
        """Same vertex set, subset of edges."""
        g = Graph.__new__(Graph)
        g.n = self.n
        g.directed = self.directed
        g.edge_u = self.edge_u[mask]
        g.edge_v = self.edge_v[mask]
        g.edge_len = self.edge_len[mask]
        g._out_indptr = None
        g._in_indptr = None
        g._adj_lists = None
        g._in_adj_lists = None
        g._edge_lookup = None
        return g

    def induced_subgraph(self, vertices: np.ndarray) -> tuple["Graph", np.ndarray]:
        """Subgraph on the given (sorted unique) vertex ids.

        Returns (subgraph, orig_ids) with orig_ids[local] = original id.
        """
        vertices = np.asarray(vertices, dtype=np.int64)
        local = np.full(self.n, -1, dtype=np.int64)
        local[vertices] = np.arange(vertices.shape[0], dtype=np.int64)
        keep = (local[self.edge_u] >= 0) & (local[self.edge_v] >= 0)
        g = Graph.__new__(Graph)
        g.n = int(vertices.shape[0])
        g.directed = self.directed
        g.edge_u = local[self.edge_u[keep]]
        g.edge_v = local[self.edge_v[keep]]
        g.edge_len = self.edge_len[keep]
        g._out_indptr = None
        g._in_indptr = None
        g._adj_lists = None
        g._in_adj_lists = None
        g._edge_lookup = None
        return g, vertices

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, m={self.m}, {kind})"


class PartialAssignment:
    """Per-vertex optional values; NaN marks a free vertex."""

    __slots__ = ("values",)

    def __init__(self, values: Sequence[Optional[float]] | np.ndarray):
        if isinstance(values, np.ndarray):
            arr = values.astype(np.float64, copy=True)
        else:
            arr = np.array([FREE if v is None else float(v) for v in values], dtype=np.float64)
        if np.any(np.isinf(arr)):
            raise GraphFormatError("labels must be finite")
        arr.setflags(write=False)
        self.values = arr

    @classmethod
    def from_dict(cls, n: int, labels: dict[int, float]) -> "PartialAssignment":
        arr = np.full(n, FREE, dtype=np.float64)
        for x, val in labels.items():
            if not (0 <= int(x) < n):
                raise GraphFormatError(f"label on unknown vertex {x}")
            arr[int(x)] = float(val)
        return cls(arr)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def terminal_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def terminals(self) -> np.ndarray:
        return np.flatnonzero(self.terminal_mask())

    def is_terminal(self, x: int) -> bool:
        return not np.isnan(self.values[x])

    @property
    def is_complete(self) -> bool:
        return bool(self.terminal_mask().all())

    def value(self, x: int) -> float:
        v = float(self.values[x])
        if np.isnan(v):
            raise MissingValueError(f"vertex {x} is free")
        return v

    def restrict(self, vertices: np.ndarray) -> "PartialAssignment":
        return PartialAssignment(self.values[vertices])

    def extended(self, updates: dict[int, float]) -> "PartialAssignment":
        arr = self.values.copy()
        for x, val in updates.items():
            arr[x] = val
        return PartialAssignment(arr)

    def __repr__(self) -> str:
        return f"PartialAssignment(n={self.n}, terminals={int(self.terminal_mask().sum())})"


@dataclass(frozen=True)
class TerminalPath:
    """Vertex walk between two terminals; gradient = (first - last) / length."""

    vertices: tuple[int, ...]
    length: float
    gradient: float

    @classmethod
    def build(cls, g: Graph, v0: PartialAssignment, vertices: Sequence[int]) -> "TerminalPath":
        vertices = tuple(int(x) for x in vertices)
        if len(vertices) < 2:
            raise NoTerminalPathError("a terminal path needs at least two vertices")
        total = 0.0
        for a, b in zip(vertices, vertices[1:]):
            hit = g.edge_between(a, b)
            if hit is None:
                raise NoTerminalPathError(f"no edge between {a} and {b}")
            total += hit[1]
        grad = (v0.value(vertices[0]) - v0.value(vertices[-1])) / total
        return cls(vertices, total, grad)

    @property
    def first(self) -> int:
        return self.vertices[0]

    @property
    def last(self) -> int:
        return self.vertices[-1]


class LexOrder(Enum):
    LESS = -1
    EQUAL = 0  # equal as multisets of absolute values
    GREATER = 1


def gradient(g: Graph, v: PartialAssignment, edge: int | tuple[int, int]) -> float:
    """Signed gradient (v(x) - v(y)) / len(x, y) on one edge of a complete assignment."""
    if isinstance(edge, tuple):
        x, y = edge
        hit = g.edge_between(x, y)
        if hit is None:
            raise GraphFormatError(f"no edge between {x} and {y}")
        length = hit[1]
    else:
        eid = int(edge)
        x, y = int(g.edge_u[eid]), int(g.edge_v[eid])
        length = float(g.edge_len[eid])
    return (v.value(x) - v.value(y)) / length


def gradient_vector(g: Graph, values: np.ndarray) -> np.ndarray:
    """Per-edge signed gradients in the graph's fixed edge order."""
    values = np.asarray(values, dtype=np.float64)
    return (values[g.edge_u] - values[g.edge_v]) / g.edge_len


def grad_plus_vector(g: Graph, values: np.ndarray) -> np.ndarray:
    """Directed gradients: positive part of the signed gradient along orientation."""
    return np.maximum(gradient_vector(g, values), 0.0)


def inf_norm_of(g: Graph, values: np.ndarray) -> float:
    """Max |gradient| (undirected) or max directed gradient (directed)."""
    if g.m == 0:
        return 0.0
    grads = gradient_vector(g, values)
    if g.directed:
        return float(max(grads.max(), 0.0))
    return float(np.abs(grads).max())


def lex_compare(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray, tol: float = DEFAULT_TOL) -> LexOrder:
    """Compare two gradient vectors in the lexicographic order on sorted |values|.

    Entries within the relative tolerance count as equal; EQUAL means the
    sorted absolute values coincide as multisets.
    """
    a = np.abs(np.asarray(a, dtype=np.float64))
    b = np.abs(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape:
        raise ValueError(f"gradient vectors differ in length: {a.shape[0]} vs {b.shape[0]}")
    a = np.sort(a)[::-1]
    b = np.sort(b)[::-1]
    for x, y in zip(a, b):
        if values_close(x, y, tol):
            continue
        return LexOrder.LESS if x < y else LexOrder.GREATER
    return LexOrder.EQUAL


@dataclass(frozen=True)
class WellPosednessReport:
    ok: bool
    # undirected defects: connected components (tuples of vertices) with no terminal
    unlabeled_components: tuple[tuple[int, ...], ...] = ()
    # directed defects: free vertices on no terminal-to-terminal directed path
    stranded_vertices: tuple[int, ...] = ()

    def describe(self) -> str:
        if self.ok:
            return "ok"
        parts = []
        if self.unlabeled_components:
            comps = ", ".join("{" + ",".join(map(str, c)) + "}" for c in self.unlabeled_components)
            parts.append(f"components without a terminal: {comps}")
        if self.stranded_vertices:
            parts.append(f"free vertices on no terminal-to-terminal path: {list(self.stranded_vertices)}")
        return "; ".join(parts)


def _reachable_from(g: Graph, seeds: np.ndarray, reverse: bool) -> np.ndarray:
    """Boolean mask of vertices reachable from any seed along edge orientation."""
    indptr, head, _ = g._in_csr() if reverse else g._out_csr()
    seen = np.zeros(g.n, dtype=bool)
    stack = [int(s) for s in seeds]
    seen[seeds] = True
    while stack:
        x = stack.pop()
        for y in head[indptr[x]:indptr[x + 1]]:
            if not seen[y]:
                seen[y] = True
                stack.append(int(y))
    return seen


def check_well_posed(g: Graph, v0: PartialAssignment) -> WellPosednessReport:
    """Undirected: every component holds a terminal. Directed: every free vertex
    lies on a terminal-to-terminal directed path. The report is the result."""
    if v0.n != g.n:
        raise GraphFormatError("assignment size does not match graph")
    terminals = v0.terminals()
    if g.directed:
        if terminals.size == 0:
            stranded = tuple(range(g.n))
            return WellPosednessReport(False, stranded_vertices=stranded)
        from_t = _reachable_from(g, terminals, reverse=False)
        to_t = _reachable_from(g, terminals, reverse=True)
        free = ~v0.terminal_mask()
        bad = np.flatnonzero(free & ~(from_t & to_t))
        if bad.size:
            return WellPosednessReport(False, stranded_vertices=tuple(int(x) for x in bad))
        return WellPosednessReport(True)

    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    if g.m:
        mat = csr_matrix((np.ones(g.m), (g.edge_u, g.edge_v)), shape=(g.n, g.n))
    else:
        mat = csr_matrix((g.n, g.n))
    _, labels = connected_components(mat, directed=False)
    tmask = v0.terminal_mask()
    bad_components = []
    for comp in np.unique(labels):
        members = np.flatnonzero(labels == comp)
        if not tmask[members].any():
            bad_components.append(tuple(int(x) for x in members))
    if bad_components:
        return WellPosednessReport(False, unlabeled_components=tuple(bad_components))
    return WellPosednessReport(True)


def require_well_posed(g: Graph, v0: PartialAssignment) -> None:
    report = check_well_posed(g, v0)
    if not report.ok:
        raise NotWellPosedError(report)


def single_source_distances(
    g: Graph, source: int, reverse: bool = False, with_parents: bool = False
) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
    """Plain Dijkstra from one vertex (along orientation; reversed if asked).

    Unreachable vertices get +inf. Heap ties break on vertex id so parent
    trees are deterministic.
    """
    adj = g.adjacency_lists(reverse=reverse)
    dist = np.full(g.n, np.inf, dtype=np.float64)
    parent = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0.0
    heap: list[tuple[float, int]] = [(0.0, int(source))]
    done = np.zeros(g.n, dtype=bool)
    while heap:
        d, x = heapq.heappop(heap)
        if done[x]:
            continue
        done[x] = True
        for y, w in adj[x]:
            nd = d + w
            if nd < dist[y]:
                dist[y] = nd
                parent[y] = x
                heapq.heappush(heap, (nd, y))
    if with_parents:
        return dist, parent
    return dist


def terminal_pair_distances(g: Graph, v0: PartialAssignment) -> tuple[np.ndarray, np.ndarray]:
    """(terminals, dist) with dist[i, j] = shortest distance terminal i -> terminal j.

    Paths may run through other terminals. Uses scipy above desk scale.
    """
    terminals = v0.terminals()
    k = terminals.shape[0]
    if k == 0:
        return terminals, np.zeros((0, 0))
    if g.n > 2048:
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import dijkstra as sp_dijkstra

        if g.directed:
            mat = csr_matrix((g.edge_len, (g.edge_u, g.edge_v)), shape=(g.n, g.n))
        else:
            mat = csr_matrix(
                (np.concatenate([g.edge_len] * 2),
                 (np.concatenate([g.edge_u, g.edge_v]), np.concatenate([g.edge_v, g.edge_u]))),
                shape=(g.n, g.n),
            )
        dist = sp_dijkstra(mat, directed=True, indices=terminals)
        return terminals, dist[:, terminals]
    out = np.empty((k, k), dtype=np.float64)
    for i, t in enumerate(terminals):
        out[i] = single_source_distances(g, int(t))[terminals]
    return terminals, out


def enumerate_terminal_gradients(
    g: Graph, v0: PartialAssignment, dedup_tol: float = 1e-12
) -> np.ndarray:
    """Sorted deduplicated gradients (v0(s)-v0(t))/dist(s,t) over ordered terminal
    pairs with finite distance. The exact-solver binary search runs over these."""
    terminals, dist = terminal_pair_distances(g, v0)
    k = terminals.shape[0]
    if k < 2:
        return np.zeros(0)
    vals = v0.values[terminals]
    grads = []
    for i in range(k):
        for j in range(k):
            if i == j or not np.isfinite(dist[i, j]) or dist[i, j] <= 0:
                continue
            grads.append((vals[i] - vals[j]) / dist[i, j])
    if not grads:
        return np.zeros(0)
    out = np.sort(np.asarray(grads, dtype=np.float64))
    keep = [out[0]]
    for x in out[1:]:
        if abs(x - keep[-1]) > dedup_tol * rel_scale(x, keep[-1]):
            keep.append(x)
    return np.asarray(keep)
