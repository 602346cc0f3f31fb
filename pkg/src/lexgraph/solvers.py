"""Inf- and lex-minimization solvers plus the averaging verifier.

The reference lex solver repeatedly fixes a steepest free terminal path; the
fast solver fixes whole pressure plateaus per connected component before
descending. Both produce the same (unique) extension on undirected graphs.
"""

from __future__ import annotations

import math
import statistics
import sys
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    Graph,
    LexgraphError,
    NoTerminalPathError,
    PartialAssignment,
    TerminalPath,
    definitely_greater,
    gradient_vector,
    inf_norm_of,
    require_well_posed,
)
from .envelopes import envelope_pair, high_pressure_subgraph
from .steepest import _vertex_steepest, steepest_path


@dataclass(frozen=True)
class SolverResult:
    """assignment extends the input labels; inf_norm is measured on the actual
    output gradients; iterations counts path fixes (1 for the direct inf solve)."""

    assignment: np.ndarray
    inf_norm: float
    iterations: int
    fixed_order: tuple[tuple[TerminalPath, float], ...]


@dataclass(frozen=True)
class AmbiguousVertex:
    vertex: int
    lower: float
    upper: float
    assigned: float


@dataclass(frozen=True)
class DirectedLexResult:
    result: SolverResult
    ambiguous: tuple[AmbiguousVertex, ...]
    # edges outside the fixed set whose final directed gradient is not ~0
    violations: tuple[tuple[int, float], ...]
    # vertices pinned by path fixing, before interval resolution
    fixed_before_resolution: np.ndarray | None = None


@dataclass(frozen=True)
class MaxMinReport:
    ok: bool
    violations: tuple[tuple[int, float, float], ...]  # (vertex, max grad, min grad)


def _fix_path_inplace(g: Graph, values: np.ndarray, path: TerminalPath, tol: float) -> float:
    first, last = path.first, path.last
    if np.isnan(values[first]) or np.isnan(values[last]):
        raise NoTerminalPathError("fix_path needs a path with terminal endpoints")
    lengths = []
    for a, b in zip(path.vertices, path.vertices[1:]):
        hit = g.edge_between(a, b)
        if hit is None:
            raise NoTerminalPathError(f"path step ({a},{b}) is not an edge")
        lengths.append(hit[1])
    total = float(sum(lengths))
    grad = (values[first] - values[last]) / total
    run = 0.0
    for (a, b), w in zip(zip(path.vertices, path.vertices[1:]), lengths):
        run += w
        if b == last:
            continue
        target = values[first] - grad * run
        if np.isnan(values[b]):
            values[b] = target
        elif abs(values[b] - target) > 1e-6 * max(1.0, abs(target), abs(values[b])):
            raise LexgraphError(
                f"path revisits vertex {b} with inconsistent value "
                f"({values[b]} vs {target}); not a steepest fixable path"
            )
    if __debug__:
        for (a, b), w in zip(zip(path.vertices, path.vertices[1:]), lengths):
            drop = values[a] - values[b]
            assert abs(drop - grad * w) <= 1e-6 * max(1.0, abs(values[a]), abs(values[b])), (
                "fixed path does not have constant gradient"
            )
    return float(grad)


def fix_path(g: Graph, v0: PartialAssignment, path: TerminalPath, tol: float = DEFAULT_TOL) -> PartialAssignment:
    """Assign interior free vertices of a steepest fixable path by linear
    interpolation in path-length coordinate; existing values are unchanged."""
    values = v0.values.copy()
    _fix_path_inplace(g, values, path, tol)
    return PartialAssignment(values)


def _terminal_edge_mask(g: Graph, values: np.ndarray) -> np.ndarray:
    fixed = ~np.isnan(values)
    return fixed[g.edge_u] & fixed[g.edge_v]


def comp_inf_min(
    g: Graph, v0: PartialAssignment, seed: int = 0, tol: float = DEFAULT_TOL, backend: str = "auto"
) -> SolverResult:
    """Inf-minimizer: the midpoint of the two extremal extensions at the
    critical gradient (max terminal-terminal edge gradient vs steepest free
    terminal path)."""
    require_well_posed(g, v0)
    tt = _terminal_edge_mask(g, v0.values)
    alpha = 0.0
    if tt.any():
        grads = (v0.values[g.edge_u[tt]] - v0.values[g.edge_v[tt]]) / g.edge_len[tt]
        alpha = float(grads.max() if g.directed else np.abs(grads).max())
        alpha = max(alpha, 0.0)
    pruned = g.with_edge_mask(~tt)
    fixed_order: tuple[tuple[TerminalPath, float], ...] = ()
    if not v0.is_complete:
        path = steepest_path(pruned, v0, seed=seed, tol=tol)
        alpha = max(alpha, path.gradient if not g.directed else max(path.gradient, 0.0))
        fixed_order = ((path, path.gradient),)
    vlow, vhigh = envelope_pair(pruned, v0, alpha, backend=backend)
    values = np.where(v0.terminal_mask(), v0.values, 0.5 * (vlow.values + vhigh.values))
    return SolverResult(values, inf_norm_of(g, values), 1, fixed_order)


def comp_lex_min(
    g: Graph, v0: PartialAssignment, seed: int = 0, tol: float = DEFAULT_TOL
) -> SolverResult:
    """Reference lex-minimizer: fix one steepest free terminal path per round."""
    if g.directed:
        raise ValueError("comp_lex_min handles undirected graphs; use directed_lex_min")
    require_well_posed(g, v0)
    rng = np.random.default_rng(seed)
    values = v0.values.copy()
    fixed: list[tuple[TerminalPath, float]] = []
    prev = math.inf
    # the pressure test resolves gradients no finer than tol * value scale /
    # path length, so the ordering check gets the same slack
    label_scale = max(1.0, float(np.nanmax(np.abs(v0.values))))
    grad_slack = 1e-7 * label_scale / min(1.0, float(g.edge_len.min())) if g.m else 0.0
    while np.isnan(values).any():
        cur = PartialAssignment(values)
        work = g.with_edge_mask(~_terminal_edge_mask(g, values))
        path = steepest_path(work, cur, seed=int(rng.integers(2**63)), tol=tol)
        if path.gradient > prev + grad_slack:
            raise LexgraphError(
                f"fixed gradients must be non-increasing; got {path.gradient} after {prev}"
            )
        prev = min(prev, path.gradient)
        grad = _fix_path_inplace(g, values, path, tol)
        fixed.append((path, grad))
    return SolverResult(values, inf_norm_of(g, values), len(fixed), tuple(fixed))


class _FastState:
    __slots__ = ("root", "values", "rng", "fixed", "tol", "backend", "depth")

    def __init__(self, root, values, rng, tol, backend):
        self.root = root
        self.values = values
        self.rng = rng
        self.fixed: list[tuple[TerminalPath, float]] = []
        self.tol = tol
        self.backend = backend
        self.depth = 0


def _fix_paths_above(g: Graph, orig: np.ndarray, alpha: float, state: _FastState) -> None:
    """Fix every free terminal path with gradient above alpha inside g,
    recursing per connected high-pressure component."""
    state.depth += 1
    if state.depth > 4096:
        raise LexgraphError("pressure recursion too deep; instance is pathological")
    try:
        while True:
            local_vals = state.values[orig]
            if not np.isnan(local_vals).any():
                return
            cur = PartialAssignment(local_vals)
            work = g.with_edge_mask(~_terminal_edge_mask(g, local_vals))
            if work.m == 0:
                raise LexgraphError("free vertices left with no usable edges")
            eid = int(state.rng.integers(work.m))
            x3 = int(state.rng.integers(work.n))
            samples = []
            for x in (int(work.edge_u[eid]), int(work.edge_v[eid]), x3):
                if x not in samples:
                    samples.append(x)
            best = None
            for x in samples:
                path = _vertex_steepest(work, cur, x, state.rng, state.tol)
                if path is not None and (best is None or path.gradient > best.gradient):
                    best = path
            if best is None:
                raise LexgraphError("no terminal path found in a well-posed instance")
            hp = high_pressure_subgraph(work, cur, best.gradient, tol=state.tol, backend=state.backend)
            if hp.graph.m == 0:
                mapped = TerminalPath(tuple(int(orig[v]) for v in best.vertices), best.length, best.gradient)
                grad = _fix_path_inplace(state.root, state.values, mapped, state.tol)
                state.fixed.append((mapped, grad))
            else:
                comp_labels = _components(hp.graph)
                hp_orig = orig[hp.vertices]
                for c in range(comp_labels.max() + 1):
                    members = np.flatnonzero(comp_labels == c)
                    sub, local_ids = hp.graph.induced_subgraph(members)
                    _fix_paths_above(sub, hp_orig[local_ids], best.gradient, state)
            if alpha > 0.0:
                local_vals = state.values[orig]
                if not np.isnan(local_vals).any():
                    return
                work = g.with_edge_mask(~_terminal_edge_mask(g, local_vals))
                shrink = high_pressure_subgraph(
                    work, PartialAssignment(local_vals), alpha, tol=state.tol, backend=state.backend
                )
                if shrink.graph.n == 0:
                    return
                g = shrink.graph
                orig = orig[shrink.vertices]
    finally:
        state.depth -= 1


def _components(g: Graph) -> np.ndarray:
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    if g.m == 0:
        return np.arange(g.n, dtype=np.int64)
    mat = csr_matrix((np.ones(g.m), (g.edge_u, g.edge_v)), shape=(g.n, g.n))
    _, labels = connected_components(mat, directed=False)
    return labels


def comp_fast_lex_min(
    g: Graph, v0: PartialAssignment, seed: int = 0, tol: float = DEFAULT_TOL, backend: str = "auto"
) -> SolverResult:
    """Lex-minimizer via per-component pressure descent; same output as
    comp_lex_min, much faster on large graphs."""
    if g.directed:
        raise ValueError("comp_fast_lex_min handles undirected graphs; use directed_lex_min")
    require_well_posed(g, v0)
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 20000))
    state = _FastState(g, v0.values.copy(), np.random.default_rng(seed), tol, backend)
    try:
        while np.isnan(state.values).any():
            _fix_paths_above(g, np.arange(g.n, dtype=np.int64), 0.0, state)
    finally:
        sys.setrecursionlimit(old_limit)
    values = state.values
    return SolverResult(values, inf_norm_of(g, values), len(state.fixed), tuple(state.fixed))


def directed_lex_min(
    g: Graph, v0: PartialAssignment, seed: int = 0, tol: float = DEFAULT_TOL
) -> DirectedLexResult:
    """Directed lex-minimization: fix steepest positive-gradient directed
    paths, then resolve the leftover interval-constrained vertices.

    Every edge outside the fixed set must end with directed gradient ~0; the
    chosen completion (interval endpoint, or the value closest to the median
    of the original labels) satisfies that, and any numerical violations are
    reported rather than swallowed.
    """
    if not g.directed:
        raise ValueError("directed_lex_min needs a directed graph")
    require_well_posed(g, v0)
    rng = np.random.default_rng(seed)
    values = v0.values.copy()
    fixed: list[tuple[TerminalPath, float]] = []
    while np.isnan(values).any():
        cur = PartialAssignment(values)
        work = g.with_edge_mask(~_terminal_edge_mask(g, values))
        path = steepest_path(work, cur, seed=int(rng.integers(2**63)), tol=tol)
        if not definitely_greater(path.gradient, 0.0, tol):
            break
        grad = _fix_path_inplace(g, values, path, tol)
        fixed.append((path, grad))

    fixed_mask = ~np.isnan(values)
    ambiguous: list[AmbiguousVertex] = []
    if not fixed_mask.all():
        median = float(statistics.median(v0.values[v0.terminals()].tolist()))
        values, ambiguous = _resolve_intervals(g, values, median)

    grads = gradient_vector(g, values)
    outside = ~(fixed_mask[g.edge_u] & fixed_mask[g.edge_v])
    violations = tuple(
        (int(e), float(grads[e]))
        for e in np.flatnonzero(outside)
        if definitely_greater(grads[e], 0.0, tol)
    )
    result = SolverResult(values, inf_norm_of(g, values), len(fixed), tuple(fixed))
    return DirectedLexResult(result, tuple(ambiguous), violations, fixed_mask)


def _resolve_intervals(g: Graph, values: np.ndarray, median: float):
    """Assign leftover free vertices. Constraints: along every remaining edge
    (x, y) the completion must satisfy v(x) <= v(y), so each strongly
    connected free component gets one interval [max upstream fixed value,
    min downstream fixed value]."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    free = np.flatnonzero(np.isnan(values))
    local = np.full(g.n, -1, dtype=np.int64)
    local[free] = np.arange(free.size)
    eu, ev = g.edge_u, g.edge_v
    ff = (local[eu] >= 0) & (local[ev] >= 0)
    if ff.any():
        mat = csr_matrix(
            (np.ones(int(ff.sum())), (local[eu[ff]], local[ev[ff]])), shape=(free.size, free.size)
        )
        n_comp, comp = connected_components(mat, directed=True, connection="strong")
    else:
        n_comp, comp = free.size, np.arange(free.size)

    lower = np.full(n_comp, -np.inf)
    upper = np.full(n_comp, np.inf)
    succ: list[set[int]] = [set() for _ in range(n_comp)]
    pred: list[set[int]] = [set() for _ in range(n_comp)]
    for e in range(g.m):
        u, v = int(eu[e]), int(ev[e])
        lu, lv = local[u], local[v]
        if lu >= 0 and lv >= 0:
            cu, cv = int(comp[lu]), int(comp[lv])
            if cu != cv:
                succ[cu].add(cv)
                pred[cv].add(cu)
        elif lu < 0 and lv >= 0:
            cv = int(comp[lv])
            lower[cv] = max(lower[cv], values[u])
        elif lu >= 0 and lv < 0:
            cu = int(comp[lu])
            upper[cu] = min(upper[cu], values[v])

    order = _topo_order(n_comp, succ, pred)
    for c in order:
        for s in succ[c]:
            lower[s] = max(lower[s], lower[c])
    for c in reversed(order):
        for p in pred[c]:
            upper[p] = min(upper[p], upper[c])

    ambiguous = []
    for i, x in enumerate(free):
        c = int(comp[i])
        lo, hi = float(lower[c]), float(upper[c])
        if math.isinf(lo) and math.isinf(hi):
            val = median
        elif math.isinf(lo):
            val = hi
        elif math.isinf(hi):
            val = lo
        else:
            val = min(max(median, lo), hi)
        values[x] = val
        ambiguous.append(AmbiguousVertex(int(x), lo, hi, float(val)))
    return values, ambiguous


def _topo_order(n: int, succ: list[set[int]], pred: list[set[int]]) -> list[int]:
    indeg = [len(p) for p in pred]
    queue = [c for c in range(n) if indeg[c] == 0]
    order = []
    while queue:
        c = queue.pop()
        order.append(c)
        for s in succ[c]:
            indeg[s] -= 1
            if indeg[s] == 0:
                queue.append(s)
    if len(order) != n:
        raise LexgraphError("free-component condensation is not acyclic")
    return order


def verify_max_min(
    g: Graph, v0: PartialAssignment, values: np.ndarray, tol: float = 1e-7
) -> MaxMinReport:
    """Check the averaging characterization: at every free vertex the largest
    outgoing gradient equals the negated smallest one. Passing is equivalent
    to being the lex-minimizer of the (undirected, well-posed) instance."""
    if g.directed:
        raise ValueError("the max-min averaging characterization is undirected")
    values = np.asarray(values, dtype=np.float64)
    grads_u = (values[g.edge_u] - values[g.edge_v]) / g.edge_len
    gmax = np.full(g.n, -np.inf)
    gmin = np.full(g.n, np.inf)
    np.maximum.at(gmax, g.edge_u, grads_u)
    np.minimum.at(gmin, g.edge_u, grads_u)
    np.maximum.at(gmax, g.edge_v, -grads_u)
    np.minimum.at(gmin, g.edge_v, -grads_u)
    violations = []
    for x in np.flatnonzero(~v0.terminal_mask()):
        hi, lo = gmax[x], gmin[x]
        if not np.isfinite(hi):
            continue  # isolated free vertex; ill-posed instances report elsewhere
        if abs(hi + lo) > tol * max(1.0, abs(hi), abs(lo)):
            violations.append((int(x), float(hi), float(lo)))
    return MaxMinReport(not violations, tuple(violations))


def stability_check(
    g: Graph, v0: PartialAssignment, v1: PartialAssignment, seed: int = 0, tol: float = DEFAULT_TOL
) -> float:
    """Max pointwise change of the lex-minimizer under a label perturbation;
    bounded by the largest label change."""
    if not np.array_equal(v0.terminal_mask(), v1.terminal_mask()):
        raise ValueError("stability_check needs identical terminal sets")
    a = comp_lex_min(g, v0, seed=seed, tol=tol).assignment
    b = comp_lex_min(g, v1, seed=seed, tol=tol).assignment
    return float(np.abs(a - b).max()) if g.n else 0.0
