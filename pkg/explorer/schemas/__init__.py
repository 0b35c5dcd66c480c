"""Schemas package initialization."""
from .bundle import BundleParams
from .mission import MissionConfig, MissionMode, MissionOutcome, MissionSummary
from .planner import PlannerConfig, ScoreWeights
from .run import RunConfig
from .sensor import CameraModel
from .vehicle import VehicleParams
from .voxmap import MapParams

__all__ = [
    "BundleParams",
    "CameraModel",
    "MapParams",
    "MissionConfig",
    "MissionMode",
    "MissionOutcome",
    "MissionSummary",
    "PlannerConfig",
    "RunConfig",
    "ScoreWeights",
    "VehicleParams",
]
