"""Sloped distance envelopes and the pressure test.

``mod_dijkstra`` computes value(x) = min_t {v0(t) + alpha * dist(t -> x)} by a
multi-source Dijkstra whose sources start at their label values. The low and
high envelopes sandwich every extension with gradient norm <= alpha, and
their strict separation certifies that a steeper terminal path runs through
the vertex.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    Graph,
    NotWellPosedError,
    PartialAssignment,
    WellPosednessReport,
)

# above this size the scipy backend takes over ("auto")
SCIPY_CUTOFF = 2048


@dataclass(frozen=True)
class Envelope:
    """Per-vertex envelope values plus the Dijkstra parent tree.

    parent[x] = -1 on sources/unreached; elsewhere the recurrence
    value(x) = value(parent(x)) +/- alpha * len(x, parent(x)) holds.
    """

    values: np.ndarray
    parent: np.ndarray
    alpha: float


@dataclass(frozen=True)
class PressureSubgraph:
    """Induced subgraph on the vertices whose pressure exceeds a threshold."""

    graph: Graph
    vertices: np.ndarray  # original ids, ascending
    alpha: float


def _heap_mod_dijkstra(g: Graph, v0: PartialAssignment, alpha: float, reverse: bool):
    adj = g.adjacency_lists(reverse=reverse)
    n = g.n
    dist = np.full(n, np.inf, dtype=np.float64)
    parent = np.full(n, -1, dtype=np.int64)
    heap: list[tuple[float, int]] = []
    for t in v0.terminals():
        t = int(t)
        dist[t] = v0.values[t]
        heap.append((dist[t], t))
    heapq.heapify(heap)
    done = np.zeros(n, dtype=bool)
    while heap:
        d, x = heapq.heappop(heap)
        if done[x]:
            continue
        done[x] = True
        for y, w in adj[x]:
            nd = d + alpha * w
            if nd < dist[y]:
                dist[y] = nd
                parent[y] = x
                heapq.heappush(heap, (nd, y))
    return dist, parent


def _scipy_mod_dijkstra(g: Graph, v0: PartialAssignment, alpha: float, reverse: bool):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra as sp_dijkstra

    terminals = v0.terminals()
    base = float(v0.values[terminals].min())
    if g.directed:
        src = g.edge_v if reverse else g.edge_u
        dst = g.edge_u if reverse else g.edge_v
        rows = [src, np.full(terminals.shape[0], g.n, dtype=np.int64)]
        cols = [dst, terminals]
        data = [alpha * g.edge_len, v0.values[terminals] - base]
    else:
        rows = [g.edge_u, g.edge_v, np.full(terminals.shape[0], g.n, dtype=np.int64)]
        cols = [g.edge_v, g.edge_u, terminals]
        data = [alpha * g.edge_len, alpha * g.edge_len, v0.values[terminals] - base]
    mat = csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(g.n + 1, g.n + 1),
    )
    dist, pred = sp_dijkstra(mat, directed=True, indices=g.n, return_predecessors=True)
    values = dist[: g.n] + base
    parent = pred[: g.n].astype(np.int64)
    parent[(parent == g.n) | (parent < 0)] = -1
    return values, parent


def mod_dijkstra(
    g: Graph,
    v0: PartialAssignment,
    alpha: float,
    reverse: bool = False,
    backend: str = "auto",
    require_complete: bool = True,
) -> Envelope:
    """Envelope value(x) = min over terminals t of v0(t) + alpha * dist(t -> x).

    Distances follow edge orientation toward x (``reverse`` flips it). With
    ``require_complete`` a vertex unreachable from every terminal raises
    NotWellPosedError; otherwise it carries +inf and parent -1.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    if v0.terminals().size == 0:
        raise NotWellPosedError(WellPosednessReport(False, stranded_vertices=tuple(range(g.n))))
    if backend == "auto":
        backend = "scipy" if g.n > SCIPY_CUTOFF else "heap"
    if backend == "heap":
        values, parent = _heap_mod_dijkstra(g, v0, alpha, reverse)
    elif backend == "scipy":
        values, parent = _scipy_mod_dijkstra(g, v0, alpha, reverse)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if require_complete and not np.isfinite(values).all():
        bad = tuple(int(x) for x in np.flatnonzero(~np.isfinite(values)))
        raise NotWellPosedError(WellPosednessReport(False, stranded_vertices=bad))
    return Envelope(values, parent, float(alpha))


def comp_vlow(g: Graph, v0: PartialAssignment, alpha: float, **kw) -> Envelope:
    """Low envelope: min_t {v0(t) + alpha * dist(x -> t)} (x-to-terminal distances)."""
    return mod_dijkstra(g, v0, alpha, reverse=g.directed, **kw)


def comp_vhigh(g: Graph, v0: PartialAssignment, alpha: float, **kw) -> Envelope:
    """High envelope: max_t {v0(t) - alpha * dist(t -> x)} via negated labels."""
    neg = PartialAssignment(np.negative(v0.values))
    env = mod_dijkstra(g, neg, alpha, reverse=False, **kw)
    return Envelope(np.negative(env.values), env.parent, float(alpha))


def envelope_pair(
    g: Graph, v0: PartialAssignment, alpha: float, backend: str = "auto", require_complete: bool = True
) -> tuple[Envelope, Envelope]:
    vlow = comp_vlow(g, v0, alpha, backend=backend, require_complete=require_complete)
    vhigh = comp_vhigh(g, v0, alpha, backend=backend, require_complete=require_complete)
    return vlow, vhigh


def _strictly_separated(vhigh: np.ndarray, vlow: np.ndarray, tol: float) -> np.ndarray:
    out = np.zeros(vhigh.shape[0], dtype=bool)
    finite = np.isfinite(vhigh) & np.isfinite(vlow)
    scale = np.maximum(1.0, np.maximum(np.abs(vhigh[finite]), np.abs(vlow[finite])))
    out[finite] = (vhigh[finite] - vlow[finite]) > tol * scale
    return out


def pressure_exceeds(
    g: Graph, v0: PartialAssignment, alpha: float, tol: float = DEFAULT_TOL, backend: str = "auto"
) -> np.ndarray:
    """Per-vertex test: does a terminal path with gradient > alpha run through x?

    Equivalent to vHigh[alpha](x) > vLow[alpha](x) beyond tolerance. Vertices
    with no terminal path through them (possible on directed graphs) report
    False for every alpha >= 0.
    """
    vlow, vhigh = envelope_pair(g, v0, alpha, backend=backend, require_complete=False)
    return _strictly_separated(vhigh.values, vlow.values, tol)


def high_pressure_subgraph(
    g: Graph, v0: PartialAssignment, alpha: float, tol: float = DEFAULT_TOL, backend: str = "auto"
) -> PressureSubgraph:
    """Induced subgraph on {x : pressure(x) > alpha}; may be empty."""
    mask = pressure_exceeds(g, v0, alpha, tol=tol, backend=backend)
    vertices = np.flatnonzero(mask)
    sub, orig = g.induced_subgraph(vertices)
    return PressureSubgraph(sub, orig, float(alpha))
