"""Services für mimolimits."""
from .capacity_service import CapacityService
from .channel_service import ChannelService
from .covariance_optimizer import CovarianceOptimizer
from .csv_export import CsvExportService
from .muxgain_service import MuxGainService

__all__ = [
    "ChannelService",
    "CapacityService",
    "CovarianceOptimizer",
    "MuxGainService",
    "CsvExportService",
]
