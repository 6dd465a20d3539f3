"""Exact max-flow / minimal-surface laboratory on cylinder lattices."""

from .capacity import (
    CapacityField,
    DEFAULT_DIST,
    NoiseCoupling,
    TwoPointDist,
    flip_edge,
    realize_noise,
    sample_field,
    sample_noise_coupling,
)
from .errors import CapacityLimitError, ConfigError, GuardError
from .flow import (
    CutSet,
    FlowResult,
    anchored_flow,
    bottom_top_flow,
    canonical_min_cut,
    classify_edges,
    essential_set,
    max_flow,
    pivotal_set,
)
from .lattice import (
    CylinderSpec,
    Lattice,
    boundary_sets,
    build_lattice,
    get_lattice,
    slab_edge_boundary,
)
from .lipschitz import (
    VertexWeightField,
    brute_force_lipschitz,
    sample_vertex_field,
    solve_anchored_lipschitz,
    solve_lipschitz,
)
from .penalized import (
    PenaltyParams,
    PenaltyProfile,
    penalized_minimum,
    penalty_profile,
    sliced_flow,
    sliced_flows,
)
from .surface import ChimneyScan, chimney_scan, patched_cutsets, validate_cutset, vertical_extent

__all__ = [name for name in dir() if not name.startswith("_")]
