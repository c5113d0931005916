"""Datenmodelle für mimolimits."""
from .channel import ChannelDistribution, ChannelKind, ChannelMatrix, RngStream
from .impairments import Covariance, DistortionCovariance, ImpairmentModel
from .results import (
    CapacityLimits,
    CapacitySolution,
    CurveKind,
    CurveRecord,
    MonteCarloConfig,
    MonteCarloEstimate,
    MuxGainBounds,
    ResultCurve,
    SnrPoint,
    WaterfillAllocation,
)
from .sweep import Averaging, ChannelSource, Scenario, SisoReference, SweepSpec

__all__ = [
    "ChannelMatrix",
    "ChannelDistribution",
    "ChannelKind",
    "RngStream",
    "Covariance",
    "DistortionCovariance",
    "ImpairmentModel",
    "SnrPoint",
    "WaterfillAllocation",
    "CapacityLimits",
    "CapacitySolution",
    "MonteCarloConfig",
    "MonteCarloEstimate",
    "MuxGainBounds",
    "CurveKind",
    "CurveRecord",
    "ResultCurve",
    "Scenario",
    "ChannelSource",
    "SisoReference",
    "Averaging",
    "SweepSpec",
]
