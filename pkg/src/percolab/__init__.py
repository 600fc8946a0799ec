"""percolab: a desk-scale laboratory for subcritical percolation rates.

Finite-range percolation on Z^d, restricted/directed connection events,
cluster coarse-graining into embedded trees, Monte Carlo and exact
estimation of decay rates, and the convex machinery (unit balls, Wulff
shapes, dual directions) tying point-to-point and point-to-half-space
rates together.
"""

from .lattice import (
    LatticeSpec,
    box,
    box_at,
    cell_of,
    cell_points,
    edges_within,
    exterior_boundary,
    graph_distance,
    interior_boundary,
    make_lattice_spec,
    round_to_lattice,
    total_order_less,
)
from .geometry import (
    BoxRegion,
    Complement,
    Cone,
    Difference,
    Direction,
    FullSpace,
    HalfSpace,
    Intersection,
    cone_cover_directions,
    contains,
    direction,
    discretize,
    translate,
    truncated_cone,
)
from .models import (
    Configuration,
    EdgeOracle,
    ModelSpec,
    bernoulli,
    insertion_tolerance_bound,
    lazy_sampler,
    sample_full,
    site_modulated,
)
from .connectivity import (
    EventOutcome,
    EventSpec,
    cluster_of,
    constrained_half_space_event,
    escape_event,
    evaluate_event,
    exit_event,
    half_space_event,
    point_event,
    q_event,
)
from .coarsegrain import (
    CellSpec,
    CoarseTree,
    coarse_grain,
    covering_radius,
    energy_bound_rhs,
    enumerate_trees,
    is_valid_tree,
    make_cell,
    reconstruct,
    regular_tree_subtree_count,
    tree_from_text,
    tree_to_text,
)
from .estimate import (
    MCConfig,
    ProbEstimate,
    RateSequence,
    binomial_interval,
    estimate_probability,
    evaluate_indicators,
    exact_probability,
    fekete_check,
    rate_sequence,
)
from .convex import (
    ConvexBody,
    DualPair,
    NormTable,
    choose_dual,
    convexity_defect,
    dual_directions,
    duality_residual,
    extend_homogeneous,
    load_table,
    minimizer_check,
    norm_table,
    polar_set,
    save_table,
    triangle_check,
    unit_ball,
)

__version__ = "0.1.0"
