"""Exact and approximate outlier removal for inf-minimization.

Dropping up to k labels to minimize the max gradient reduces to minimum
vertex cover on the pressure graph over terminals, which is always a
transitively closed DAG; its cover comes from a maximum matching on the
bipartite double graph (or a min cut that encodes the transitive closure
implicitly).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
import numpy as np

from .core import (
    DEFAULT_TOL,
    Graph,
    LexgraphError,
    PartialAssignment,
    definitely_greater,
    inf_norm_of,
    require_well_posed,
    terminal_pair_distances,
)
from .envelopes import envelope_pair
from .solvers import SolverResult, _terminal_edge_mask
from .steepest import steepest_path
from .core import check_well_posed


class NotADagError(LexgraphError):
    pass


@dataclass(frozen=True)
class PressureGraph:
    """Unweighted digraph on terminal ids; arc (s, t) marks a terminal path
    from s to t steeper than the threshold. Always a transitively closed DAG."""

    nodes: tuple[int, ...]
    arcs: frozenset[tuple[int, int]]
    alpha: float | None = None

    def out_adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in self.nodes}
        for s, t in sorted(self.arcs):
            adj[s].append(t)
        return adj

    def is_dag(self) -> bool:
        adj = self.out_adjacency()
        indeg = {v: 0 for v in self.nodes}
        for s, t in self.arcs:
            indeg[t] += 1
        queue = deque(v for v in self.nodes if indeg[v] == 0)
        seen = 0
        while queue:
            v = queue.popleft()
            seen += 1
            for w in adj[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
        return seen == len(self.nodes)

    def is_transitively_closed(self) -> bool:
        arcset = self.arcs
        adj = self.out_adjacency()
        for s, t in arcset:
            for r in adj[t]:
                if r != s and (s, r) not in arcset:
                    return False
        return True


def term_pressure_graph(
    g: Graph, v0: PartialAssignment, alpha: float, tol: float = DEFAULT_TOL
) -> PressureGraph:
    """Arc (s, t) iff the shortest-path gradient from s to t exceeds alpha.

    One Dijkstra per terminal; shortest paths may run through other terminals.
    """
    terminals, dist = terminal_pair_distances(g, v0)
    return _pressure_graph_from_matrix(terminals, v0.values[terminals], dist, alpha, tol)


def _pressure_graph_from_matrix(terminals, tvals, dist, alpha, tol) -> PressureGraph:
    arcs = set()
    k = terminals.shape[0]
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            d = dist[i, j]
            if np.isfinite(d) and d > 0 and definitely_greater((tvals[i] - tvals[j]) / d, alpha, tol):
                arcs.add((int(terminals[i]), int(terminals[j])))
    return PressureGraph(tuple(int(t) for t in terminals), frozenset(arcs), float(alpha))


def hopcroft_karp(n_left: int, n_right: int, adj: list[list[int]]):
    """Maximum bipartite matching. Returns (size, match_left, match_right)
    with -1 for unmatched vertices."""
    INF = float("inf")
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [INF] * n_left
    size = 0

    def bfs() -> bool:
        queue = deque()
        for u in range(n_left):
            if match_l[u] < 0:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w < 0:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in adj[u]:
            w = match_r[v]
            if w < 0 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = INF
        return False

    while bfs():
        for u in range(n_left):
            if match_l[u] < 0 and dfs(u):
                size += 1
    return size, match_l, match_r


def _konig_cover(n_left: int, n_right: int, adj: list[list[int]], match_l, match_r):
    """Cover = (L \\ Z) + (R & Z), Z = alternating reachability from unmatched L."""
    seen_l = [False] * n_left
    seen_r = [False] * n_right
    queue = deque(u for u in range(n_left) if match_l[u] < 0)
    for u in queue:
        seen_l[u] = True
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen_r[v]:
                seen_r[v] = True
                w = match_r[v]
                if w >= 0 and not seen_l[w]:
                    seen_l[w] = True
                    queue.append(w)
    cover_l = [u for u in range(n_left) if not seen_l[u]]
    cover_r = [v for v in range(n_right) if seen_r[v]]
    return cover_l, cover_r


def min_vc_tcdag(dag: PressureGraph, validate: bool = True) -> frozenset[int]:
    """Minimum vertex cover of a transitively closed DAG via a maximum
    matching on its bipartite double graph (one left and one right copy per
    vertex, arcs become left-right edges)."""
    if validate:
        if not dag.is_dag():
            raise NotADagError("input has a directed cycle")
        if not dag.is_transitively_closed():
            raise NotADagError("input is not transitively closed")
    nodes = list(dag.nodes)
    index = {v: i for i, v in enumerate(nodes)}
    k = len(nodes)
    adj: list[list[int]] = [[] for _ in range(k)]
    for s, t in sorted(dag.arcs):
        adj[index[s]].append(index[t])
    _, match_l, match_r = hopcroft_karp(k, k, adj)
    cover_l, cover_r = _konig_cover(k, k, adj, match_l, match_r)
    return frozenset(nodes[i] for i in cover_l) | frozenset(nodes[j] for j in cover_r)


@dataclass(frozen=True)
class FlowNetwork:
    """Capacitated digraph with distinguished source and sink."""

    n_nodes: int
    source: int
    sink: int
    arcs: tuple[tuple[int, int, float], ...]


def max_flow_min_cut(net: FlowNetwork) -> tuple[float, frozenset[int]]:
    """Dinic's algorithm. Returns (flow value, source side of a min cut)."""
    n = net.n_nodes
    to: list[int] = []
    cap: list[float] = []
    head: list[list[int]] = [[] for _ in range(n)]
    for u, v, c in net.arcs:
        head[u].append(len(to))
        to.append(v)
        cap.append(float(c))
        head[v].append(len(to))
        to.append(u)
        cap.append(0.0)

    def bfs() -> list[int]:
        level = [-1] * n
        level[net.source] = 0
        queue = deque([net.source])
        while queue:
            u = queue.popleft()
            for e in head[u]:
                if cap[e] > 0 and level[to[e]] < 0:
                    level[to[e]] = level[u] + 1
                    queue.append(to[e])
        return level

    def dfs(level, iters, u, pushed) -> float:
        if u == net.sink:
            return pushed
        while iters[u] < len(head[u]):
            e = head[u][iters[u]]
            v = to[e]
            if cap[e] > 0 and level[v] == level[u] + 1:
                got = dfs(level, iters, v, min(pushed, cap[e]))
                if got > 0:
                    cap[e] -= got
                    cap[e ^ 1] += got
                    return got
            iters[u] += 1
        return 0.0

    flow = 0.0
    while True:
        level = bfs()
        if level[net.sink] < 0:
            break
        iters = [0] * n
        while True:
            pushed = dfs(level, iters, net.source, float("inf"))
            if pushed <= 0:
                break
            flow += pushed
    side = {net.source}
    queue = deque([net.source])
    seen = [False] * n
    seen[net.source] = True
    while queue:
        u = queue.popleft()
        for e in head[u]:
            if cap[e] > 0 and not seen[to[e]]:
                seen[to[e]] = True
                side.add(to[e])
                queue.append(to[e])
    return flow, frozenset(side)


def min_vc_implicit(dag: PressureGraph, validate: bool = True) -> frozenset[int]:
    """Minimum vertex cover of the transitive closure of a DAG without
    materializing the closure: min cut on the split network with back arcs
    (v, right) -> (v, left) standing in for closure edges."""
    if validate and not dag.is_dag():
        raise NotADagError("input has a directed cycle")
    nodes = list(dag.nodes)
    index = {v: i for i, v in enumerate(nodes)}
    k = len(nodes)
    if k == 0:
        return frozenset()
    source, sink = 0, 1
    left = lambda i: 2 + i
    right = lambda i: 2 + k + i
    inf_cap = float(2 * k + 1)  # one above every unit arc; never in a min cut
    arcs: list[tuple[int, int, float]] = []
    for i in range(k):
        arcs.append((source, left(i), 1.0))
        arcs.append((right(i), sink, 1.0))
        arcs.append((right(i), left(i), inf_cap))
    for s, t in sorted(dag.arcs):
        arcs.append((left(index[s]), right(index[t]), inf_cap))
    _, side = max_flow_min_cut(FlowNetwork(2 + 2 * k, source, sink, tuple(arcs)))
    cover = set()
    for i in range(k):
        if left(i) not in side or right(i) in side:
            cover.add(nodes[i])
    return frozenset(cover)


@dataclass(frozen=True)
class OutlierResult:
    result: SolverResult
    removed: frozenset[int]
    alpha: float


def _sweep_extend(g: Graph, v0: PartialAssignment, alpha: float) -> np.ndarray:
    """Feasible completion with max gradient <= alpha, robust to instances
    whose label removal stranded some vertices (envelope midpoint where both
    envelopes are finite, monotone repair sweeps elsewhere)."""
    if v0.terminals().size == 0:
        return np.zeros(g.n)  # every label dropped: any constant has gradient 0
    vlow, vhigh = envelope_pair(g, v0, alpha, require_complete=False)
    # the high envelope is the pointwise lower bound on feasible values,
    # the low envelope the upper bound
    lo, hi = vhigh.values, vlow.values
    tmask = v0.terminal_mask()
    both = np.isfinite(lo) & np.isfinite(hi)
    lo_safe = np.where(np.isfinite(lo), lo, 0.0)
    hi_safe = np.where(np.isfinite(hi), hi, 0.0)
    values = np.where(tmask, v0.values, np.where(both, 0.5 * (lo_safe + hi_safe), 0.0))
    raise_set = ~np.isfinite(hi)  # unbounded above: can only be pushed up
    lower_set = ~np.isfinite(lo) & ~raise_set
    values[raise_set & ~tmask] = np.where(np.isfinite(lo), lo, 0.0)[raise_set & ~tmask]
    values[lower_set & ~tmask] = hi[lower_set & ~tmask]
    if not (raise_set.any() or lower_set.any()):
        return values
    arcs = list(zip(g.edge_u.tolist(), g.edge_v.tolist(), g.edge_len.tolist()))
    if not g.directed:
        arcs += [(v, u, w) for u, v, w in arcs]
    for _ in range(g.n + 1):
        changed = False
        for u, v, w in arcs:
            need = values[u] - alpha * w
            if raise_set[v] and not tmask[v] and values[v] < need - 1e-15:
                values[v] = need
                changed = True
        if not changed:
            break
    for _ in range(g.n + 1):
        changed = False
        for u, v, w in arcs:
            cap = values[v] + alpha * w
            if lower_set[u] and not tmask[u] and values[u] > cap + 1e-15:
                values[u] = cap
                changed = True
        if not changed:
            break
    return values


def _max_kept_gradient(terminals, tvals, dist, keep_mask) -> float:
    best = 0.0
    idx = np.flatnonzero(keep_mask)
    for i in idx:
        for j in idx:
            if i == j:
                continue
            d = dist[i, j]
            if np.isfinite(d) and d > 0:
                best = max(best, float((tvals[i] - tvals[j]) / d))
    return best


def outlier_exact(g: Graph, v0: PartialAssignment, k: int, tol: float = DEFAULT_TOL) -> OutlierResult:
    """Exact l0 label regularization: the smallest achievable max gradient
    when up to k labels may be dropped, found by binary search over the
    terminal-pair gradients with a minimum-vertex-cover feasibility test."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    require_well_posed(g, v0)
    terminals, dist = terminal_pair_distances(g, v0)
    tvals = v0.values[terminals]
    candidates = [0.0]
    kk = terminals.shape[0]
    for i in range(kk):
        for j in range(kk):
            if i != j and np.isfinite(dist[i, j]) and dist[i, j] > 0:
                grd = float((tvals[i] - tvals[j]) / dist[i, j])
                if grd > 0:
                    candidates.append(grd)
    candidates = sorted(set(candidates))
    dedup = [candidates[0]]
    for c in candidates[1:]:
        if c - dedup[-1] > 1e-12 * max(1.0, abs(c), abs(dedup[-1])):
            dedup.append(c)

    def cover_at(alpha: float) -> frozenset[int]:
        pg = _pressure_graph_from_matrix(terminals, tvals, dist, alpha, tol)
        return min_vc_tcdag(pg, validate=False)

    lo, hi = 0, len(dedup) - 1
    best_cover = cover_at(dedup[hi])
    evaluations = 1
    if len(best_cover) > k:
        raise LexgraphError("no candidate threshold is feasible; inconsistent instance")
    while lo < hi:
        mid = (lo + hi) // 2
        cover = cover_at(dedup[mid])
        evaluations += 1
        if len(cover) <= k:
            hi = mid
            best_cover = cover
        else:
            lo = mid + 1
    alpha_star = dedup[hi]

    keep_mask = np.array([int(t) not in best_cover for t in terminals])
    freed = v0.values.copy()
    if best_cover:
        freed[np.asarray(sorted(best_cover), dtype=np.int64)] = np.nan
    v_kept = PartialAssignment(freed)
    residual = _max_kept_gradient(terminals, tvals, dist, keep_mask)
    values = _sweep_extend(g, v_kept, residual)
    result = SolverResult(values, inf_norm_of(g, values), evaluations, ())
    return OutlierResult(result, frozenset(best_cover), float(alpha_star))


def outlier_approx(
    g: Graph, v0: PartialAssignment, k: int, seed: int = 0, tol: float = DEFAULT_TOL
) -> OutlierResult:
    """Greedy 2k-removal approximation: k rounds of dropping both endpoints of
    the steepest terminal path, then an inf-min completion. Achieves the
    k-budget optimum gradient with at most 2k removals."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    require_well_posed(g, v0)
    rng = np.random.default_rng(seed)
    terminals, dist = terminal_pair_distances(g, v0)
    tvals = v0.values[terminals]
    tindex = {int(t): i for i, t in enumerate(terminals)}
    removed: set[int] = set()
    values = v0.values.copy()
    rounds = 0
    for _ in range(k):
        cur = PartialAssignment(values)
        if cur.terminals().size < 2:
            break
        endpoints = _steepest_terminal_pair(g, cur, rng, tol, terminals, tvals, dist, removed)
        if endpoints is None:
            break
        s, t = endpoints
        removed.update((s, t))
        values[s] = np.nan
        values[t] = np.nan
        rounds += 1
    keep_mask = np.array([int(t) not in removed for t in terminals])
    residual = _max_kept_gradient(terminals, tvals, dist, keep_mask)
    out = _sweep_extend(g, PartialAssignment(values), residual)
    result = SolverResult(out, inf_norm_of(g, out), rounds, ())
    return OutlierResult(result, frozenset(removed), float(residual))


def _steepest_terminal_pair(g, cur, rng, tol, terminals, tvals, dist, removed):
    """Endpoints of the steepest terminal path w.r.t. the current labels, or
    None when no path has positive gradient. Terminal-terminal edges count."""
    best = None  # (gradient, s, t)
    tt = _terminal_edge_mask(g, cur.values)
    if tt.any():
        eu, ev, el = g.edge_u[tt], g.edge_v[tt], g.edge_len[tt]
        grads = (cur.values[eu] - cur.values[ev]) / el
        if not g.directed:
            flip = grads < 0
            eu, ev = np.where(flip, ev, eu), np.where(flip, eu, ev)
            grads = np.abs(grads)
        i = int(np.argmax(grads))
        best = (float(grads[i]), int(eu[i]), int(ev[i]))
    if not cur.is_complete and check_well_posed(g, cur).ok:
        work = g.with_edge_mask(~tt)
        path = steepest_path(work, cur, seed=int(rng.integers(2**63)), tol=tol)
        if best is None or path.gradient > best[0]:
            best = (path.gradient, path.first, path.last)
    elif not cur.is_complete:
        # removals broke well-posedness; deterministic pair scan instead
        keep = [i for i, t in enumerate(terminals) if int(t) not in removed]
        for i in keep:
            for j in keep:
                if i == j or not np.isfinite(dist[i, j]) or dist[i, j] <= 0:
                    continue
                grd = float((tvals[i] - tvals[j]) / dist[i, j])
                if best is None or grd > best[0]:
                    best = (grd, int(terminals[i]), int(terminals[j]))
    if best is None or not definitely_greater(best[0], 0.0, tol):
        return None
    return best[1], best[2]
