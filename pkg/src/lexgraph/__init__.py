"""Lipschitz extensions of partially labeled functions on weighted graphs."""

from .core import (
    DEFAULT_TOL,
    Graph,
    GraphFormatError,
    LexOrder,
    LexgraphError,
    MissingValueError,
    NoTerminalPathError,
    NotWellPosedError,
    PartialAssignment,
    SizeGuardError,
    TerminalPath,
    WellPosednessReport,
    check_well_posed,
    enumerate_terminal_gradients,
    grad_plus_vector,
    gradient,
    gradient_vector,
    inf_norm_of,
    lex_compare,
)
from .envelopes import Envelope, PressureSubgraph, comp_vhigh, comp_vlow, high_pressure_subgraph, mod_dijkstra, pressure_exceeds
from .l0reg import (
    FlowNetwork,
    OutlierResult,
    PressureGraph,
    hopcroft_karp,
    max_flow_min_cut,
    min_vc_implicit,
    min_vc_tcdag,
    outlier_approx,
    outlier_exact,
    term_pressure_graph,
)
from .solvers import (
    AmbiguousVertex,
    DirectedLexResult,
    MaxMinReport,
    SolverResult,
    comp_fast_lex_min,
    comp_inf_min,
    comp_lex_min,
    directed_lex_min,
    fix_path,
    stability_check,
    verify_max_min,
)
from .steepest import StarInstance, star_gradient, star_steepest_path, steepest_path, vertex_steepest_path

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "AmbiguousVertex",
    "DirectedLexResult",
    "Envelope",
    "FlowNetwork",
    "Graph",
    "GraphFormatError",
    "LexOrder",
    "LexgraphError",
    "MaxMinReport",
    "MissingValueError",
    "NoTerminalPathError",
    "NotWellPosedError",
    "OutlierResult",
    "PartialAssignment",
    "PressureGraph",
    "PressureSubgraph",
    "SizeGuardError",
    "SolverResult",
    "StarInstance",
    "TerminalPath",
    "WellPosednessReport",
    "check_well_posed",
    "comp_fast_lex_min",
    "comp_inf_min",
    "comp_lex_min",
    "comp_vhigh",
    "comp_vlow",
    "directed_lex_min",
    "enumerate_terminal_gradients",
    "fix_path",
    "grad_plus_vector",
    "gradient",
    "gradient_vector",
    "high_pressure_subgraph",
    "hopcroft_karp",
    "inf_norm_of",
    "lex_compare",
    "max_flow_min_cut",
    "min_vc_implicit",
    "min_vc_tcdag",
    "mod_dijkstra",
    "outlier_approx",
    "outlier_exact",
    "pressure_exceeds",
    "stability_check",
    "star_gradient",
    "star_steepest_path",
    "steepest_path",
    "term_pressure_graph",
    "verify_max_min",
    "vertex_steepest_path",
]
