"""Energy-minimal rate and time allocation for TDMA over block-fading channels."""

from .channel import (
    ChannelModel,
    Constant,
    Discrete,
    FadingState,
    RayleighPower,
    SampleSet,
    expect,
    rayleigh_cdf,
    sample_states,
)
from .costreward import (
    AmcTable,
    Infinite,
    UserProfile,
    build_envelope,
    build_envelope_amc,
    build_envelope_continuous,
    envelope_eval,
    envelope_rate_at_level,
    regularize_costs,
    tangent_slope,
)
from .wsum import Allocation, ConvergenceError, InfeasibleError, SolverError, WsumSolution
from .indiv import IndivSolution, LagrangeVector
from .amc import QamSpec, build_mode_table, min_snr_for_sep, qam_sep
from .experiments import Individual, PolicyId, RegionPoint, WeightedSum

__version__ = "0.1.0"

__all__ = [
    "AmcTable",
    "Allocation",
    "ChannelModel",
    "Constant",
    "ConvergenceError",
    "Discrete",
    "FadingState",
    "Individual",
    "IndivSolution",
    "InfeasibleError",
    "Infinite",
    "LagrangeVector",
    "PolicyId",
    "QamSpec",
    "RayleighPower",
    "RegionPoint",
    "SampleSet",
    "SolverError",
    "UserProfile",
    "WeightedSum",
    "WsumSolution",
    "build_envelope",
    "build_envelope_amc",
    "build_envelope_continuous",
    "build_mode_table",
    "envelope_eval",
    "envelope_rate_at_level",
    "expect",
    "min_snr_for_sep",
    "qam_sep",
    "rayleigh_cdf",
    "regularize_costs",
    "sample_states",
    "tangent_slope",
]
