"""Rate regions for the two-user MAC with cooperative encoders and known
interference: Gaussian closed forms, exact discrete evaluation, and the
geometry to sweep, compare, and plot them."""

from .conferencing import (
    CellPartition,
    RateSplit,
    admissible,
    macce_from_maccm,
    partition_messages,
    split_rates,
)
from .discrete import (
    AuxScheme,
    ChannelFormatError,
    DmcState,
    JointDist,
    brute_force_frontier,
    joint_distribution,
    macce_bounds,
    maccm_c_pentagon,
    maccm_nc_pentagon,
    mutual_information,
    parse_channel_text,
    read_channel_file,
    validate_channel,
)
from .gaussian import (
    GaussianAuxScheme,
    GaussianMacParams,
    PowerSplit,
    cstar,
    cstar_opt,
    lambda_bits,
    macce_c_bounds,
    macce_nc_bounds,
    maccm_c_bounds,
    maccm_nc_bounds,
    make_aux_scheme,
    oracle_mi_bounds,
    oracle_optimize,
    ptilde,
    residual_interference,
    sweep_region,
)
from .geometry import (
    Frontier2,
    MaccmBounds,
    MacceBounds,
    Pentagon,
    RatePoint2,
    frontier_gap,
    frontier_union,
    make_pentagon,
    pentagon_contains,
)

__all__ = [name for name in dir() if not name.startswith("_")]
