"""Models package initialization."""
from .bundle import FirstStep, PeacockBundle, SecondStep, WorldSamples
from .mapping import Key, OccupiedVoxel, ScanUpdate
from .mission import MetricSample, MissionMetrics, PathPoint, PlannerLogEntry
from .planning import CellState, PlanDecision, PlanResult, ScoreMatrix
from .trajectory import BoundaryState, Polynomial1D, Segment3D
from .vehicle import (
    ControlInput,
    FlatTarget,
    TrackResult,
    TrackTick,
    VehicleState,
)
from .world import AABB, DepthImage, Pose, World

__all__ = [
    "AABB",
    "BoundaryState",
    "CellState",
    "ControlInput",
    "DepthImage",
    "FirstStep",
    "FlatTarget",
    "Key",
    "MetricSample",
    "MissionMetrics",
    "OccupiedVoxel",
    "PathPoint",
    "PeacockBundle",
    "PlanDecision",
    "PlanResult",
    "PlannerLogEntry",
    "Polynomial1D",
    "Pose",
    "ScanUpdate",
    "ScoreMatrix",
    "SecondStep",
    "Segment3D",
    "TrackResult",
    "TrackTick",
    "VehicleState",
    "World",
    "WorldSamples",
]
