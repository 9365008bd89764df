"""Uplink interference, outage, and intensity planning for two-tier
cellular networks: an analytic engine built on numerically evaluated
interference Laplace transforms, a cross-validating Monte Carlo spatial
simulator, and a convex planner for small-cell deployment intensities.
"""

from .model import (
    AccessMode,
    ChannelParams,
    ExclusionConfig,
    IntensityProfile,
    NetworkConfig,
    Tier1UEType,
    Tier2BSType,
    Tier2UEClass,
    Violation,
    dbm_to_mw,
    mean_ue_per_cell,
    mw_to_dbm,
    validate,
)
from .geometry import (
    Disk,
    Hexagon,
    HexLattice,
    PointPattern,
    hexagon_contains,
    in_exclusion,
    lattice_centers,
    nearest_bs,
    sample_clustered_ues,
    sample_ppp_region,
    trial_rng,
)
from .quadrature import (
    QuadratureSpec,
    DEFAULT_SPEC,
    NumericalError,
    TruncationError,
    expect_lognormal,
    integrate_disk,
    integrate_hexagon,
    integrate_plane,
    lattice_sum,
)
from .analytic import (
    InterferenceLaplace,
    TypicalQuery,
    apply_orthogonal_thinning,
    average_outage,
    coeff_C,
    laplace_cell_aggregate,
    laplace_tier1_in,
    laplace_tier1_out,
    laplace_tier2_intra,
    laplace_tier2_total,
    outage_tier1,
    outage_tier2,
    tier1_placement_average,
    tier1_total_laplace,
)
from .montecarlo import (
    CorrelationSpec,
    GapRow,
    OutageEstimate,
    Realization,
    correlate_points,
    estimate_relative_gap,
    realize,
    simulate_events,
    simulate_orthogonal,
    simulate_outage,
)
from .planner import (
    InfeasibleError,
    PlanResult,
    TradeoffSystem,
    UnboundedError,
    UtilitySpec,
    build_tradeoff,
    max_mu2_given_mu1,
    solve,
)
from .config_io import ConfigError, config_hash, load_config, parse_config

__version__ = "0.1.0"
