"""Numerical bounds on the capacity region of two-receiver broadcast channels."""
from .auxdist import AuxPair, AuxTriple, CommonInfoAux, TimeShareLaw, split_construction
from .channel import BroadcastChannel, bssc, load_channel, noiseless, save_channel
from .optimize import OptimizerConfig, brute_force_oracle, compare_bounds, max_weighted_sum, trace_region
from .regions import PolygonRegion, RatePoint, RateConstraintSet2

__all__ = [
    "AuxPair", "AuxTriple", "CommonInfoAux", "TimeShareLaw", "split_construction",
    "BroadcastChannel", "bssc", "load_channel", "noiseless", "save_channel",
    "OptimizerConfig", "brute_force_oracle", "compare_bounds", "max_weighted_sum", "trace_region",
    "PolygonRegion", "RatePoint", "RateConstraintSet2",
]
