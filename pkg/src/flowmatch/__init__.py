"""Label-assignment toolkit for detection supervision analysis.

Two matchers over the same pair costs: the classical full-cardinality
assignment baseline and a quality-pruned min-cost max-flow matcher that may
leave poorly localized targets unmatched.  Around them: box geometry, focal
and box losses, brute-force reference solvers, scenario file handling, a
synthetic scenario generator, COCO import, foregrounding statistics, and a
flat-buffer boundary for foreign callers.
"""

from .coco import CocoImport, from_coco, normalize_bbox
from .cost import (
    CostWeights,
    Origin,
    Prediction,
    Target,
    background_loss,
    cost_matrix,
    focal_negative,
    focal_positive,
    matched_loss,
    pair_cost,
    total_loss,
)
from .errors import (
    CocoFormatError,
    DimensionError,
    DomainError,
    FlowmatchError,
    GraphStructureError,
    InvalidMatchingError,
    MalformedInputError,
    OracleSizeError,
    ProtocolError,
    RemoteMatcherError,
    ScenarioError,
    ScenarioInvariantError,
    ScenarioSchemaError,
    ScenarioSyntaxError,
)
from .ffi import FlatMatchResult, flat_hungarian, flat_q_mcmf
from .geometry import Box, box_to_corners, giou, iou, quality_matrix
from .hungarian import Matching, hungarian_match
from .oracle import (
    MAX_ORACLE_SIDE,
    brute_max_matching,
    brute_min_cost_assignment,
    brute_min_cost_max_matching,
)
from .qmcmf import (
    FlowEdge,
    FlowGraph,
    PruneThresholds,
    build_flow_graph,
    mcmf_solve,
    prune_edges,
    q_mcmf_match,
)
from .scenario import (
    ImageRecord,
    Scenario,
    SynthConfig,
    generate_synthetic,
    load_scenario,
    save_scenario,
    scenario_to_jsonable,
)
from .stats import (
    DEFAULT_IOU_THRESHOLDS,
    MATCHER_NAMES,
    ImageMatchResult,
    StatsReport,
    StatsRow,
    aggregate_stats,
    foregrounding_stats,
    jsonl_record,
    match_scenario,
    run_matcher,
    stats_csv,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # geometry
    "Box",
    "box_to_corners",
    "iou",
    "giou",
    "quality_matrix",
    # costs and losses
    "Origin",
    "Prediction",
    "Target",
    "CostWeights",
    "focal_positive",
    "focal_negative",
    "pair_cost",
    "cost_matrix",
    "matched_loss",
    "background_loss",
    "total_loss",
    # matchers
    "Matching",
    "hungarian_match",
    "FlowEdge",
    "FlowGraph",
    "PruneThresholds",
    "build_flow_graph",
    "prune_edges",
    "mcmf_solve",
    "q_mcmf_match",
    # reference solvers
    "MAX_ORACLE_SIDE",
    "brute_min_cost_assignment",
    "brute_max_matching",
    "brute_min_cost_max_matching",
    # scenarios
    "Scenario",
    "ImageRecord",
    "SynthConfig",
    "load_scenario",
    "save_scenario",
    "scenario_to_jsonable",
    "generate_synthetic",
    "CocoImport",
    "from_coco",
    "normalize_bbox",
    # statistics
    "MATCHER_NAMES",
    "DEFAULT_IOU_THRESHOLDS",
    "ImageMatchResult",
    "StatsRow",
    "StatsReport",
    "run_matcher",
    "match_scenario",
    "jsonl_record",
    "aggregate_stats",
    "foregrounding_stats",
    "stats_csv",
    # foreign boundary
    "FlatMatchResult",
    "flat_hungarian",
    "flat_q_mcmf",
    # errors
    "FlowmatchError",
    "MalformedInputError",
    "DomainError",
    "DimensionError",
    "InvalidMatchingError",
    "GraphStructureError",
    "OracleSizeError",
    "ScenarioError",
    "ScenarioSyntaxError",
    "ScenarioSchemaError",
    "ScenarioInvariantError",
    "CocoFormatError",
    "ProtocolError",
    "RemoteMatcherError",
]
