"""Gaussian state amplification with noisy noncausal state observations.

Achievable rate/distortion pairs for an analog-plus-Gelfand-Pinsker scheme,
two converse bounds, a Monte Carlo oracle and region assembly.
"""

from .model import ChannelParams, DerivedParams, derive
from .inner_bound import InnerParams, InnerPoint, evaluate, frontier
from .region import RegionConfig, RegionReport, build_region

__all__ = [
    "ChannelParams",
    "DerivedParams",
    "derive",
    "InnerParams",
    "InnerPoint",
    "evaluate",
    "frontier",
    "RegionConfig",
    "RegionReport",
    "build_region",
]
