from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from explorer.schemas.mission import MissionSummary

Vec3 = Tuple[float, float, float]


@dataclass(frozen=True)
class MetricSample:
    """State of the mission at the start of one planning cycle, after the scan."""

    t: float
    position: Vec3
    velocity: Vec3
    yaw: float
    path_length: float
    free_volume: float
    occupied_volume: float
    cycle: int = 0
    score: float = 0.0
    blocked_count: int = 0
    plan_ms: float = 0.0

    @property
    def known_volume(self) -> float:
        return self.free_volume + self.occupied_volume


@dataclass(frozen=True)
class PlannerLogEntry:
    cycle: int
    row: Optional[int]
    col: Optional[int]
    max_score: float
    blocked_count: int
    wall_ms: float


@dataclass(frozen=True)
class PathPoint:
    t: float
    position: Vec3
    phase: str = "explore"


@dataclass
class MissionMetrics:
    series: List[MetricSample] = field(default_factory=list)
    path: List[PathPoint] = field(default_factory=list)
    planner_log: List[PlannerLogEntry] = field(default_factory=list)
    summary: MissionSummary = field(default_factory=MissionSummary)
