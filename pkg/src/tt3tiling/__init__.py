"""Transitive-triangle tilings of oriented graphs: exact search, constructive pipelines and experiments."""

from .exact import (
    InfeasibleBound,
    MaxTilingResult,
    SolveBudget,
    SolveOutcome,
    StageFailed,
    Status,
    decide_small_exhaustive,
    find_perfect_tiling,
    max_tiling,
)
from .extremal import ExtremalConfig, extremal_tile, find_tt3_free_witness
from .generators import (
    BadN,
    CFamilySpec,
    Exhausted,
    ExtremalSpec,
    c_family_graph,
    cyclic_blowup,
    extremal_graph,
    perturb,
    random_oriented_graph,
    random_with_min_semidegree,
    transitive_tournament,
)
from .graph import (
    BadVertex,
    GraphError,
    LoopRejected,
    OrientationConflict,
    OrientedGraph,
    Tiling,
    TransitiveTriangle,
    VertexSetPartition,
    enumerate_cyclic_triangles,
    enumerate_transitive_triangles,
    induced,
    min_semidegree,
    validate_tiling,
)
from .matching import HallViolation, hall_perfect_matching, max_matching
from .nonextremal import (
    AbsorbingSet,
    build_absorber,
    find_absorbing_set,
    find_link,
    lex_max_tiling,
    nonextremal_tile,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
