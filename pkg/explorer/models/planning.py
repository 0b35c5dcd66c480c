from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from explorer.models.trajectory import Segment3D
from explorer.models.world import AABB


class CellState(str, Enum):
    UNKNOWN = "unknown"
    FREE = "free"
    OCCUPIED = "occupied"


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Scores per (row, col) family; blocked families score 0."""

    scores: np.ndarray
    blocked: np.ndarray

    def __post_init__(self) -> None:
        if self.scores.shape != self.blocked.shape:
            raise ValueError("scores and blocked flags must share a shape")
        if np.any(self.scores[self.blocked] != 0.0):
            raise ValueError("blocked families must score 0")

    @property
    def shape(self) -> tuple:
        return self.scores.shape

    @property
    def blocked_count(self) -> int:
        return int(np.count_nonzero(self.blocked))

    @property
    def max_score(self) -> float:
        return float(self.scores.max()) if self.scores.size else 0.0


@dataclass(frozen=True)
class PlanDecision:
    """Selected(row, col) when `row`/`col` are set, AllBlocked otherwise."""

    row: Optional[int] = None
    col: Optional[int] = None

    @classmethod
    def selected(cls, row: int, col: int) -> "PlanDecision":
        return cls(row=int(row), col=int(col))

    @classmethod
    def all_blocked(cls) -> "PlanDecision":
        return cls()

    @property
    def is_selected(self) -> bool:
        return self.row is not None


@dataclass(frozen=True, eq=False)
class PlanResult:
    decision: PlanDecision
    scores: ScoreMatrix
    segment: Optional[Segment3D]
    elapsed_ms: float


@dataclass(frozen=True, eq=False)
class SafetyEnvelope:
    """Clearances a flown first step must keep from mapped obstacles (m).

    `pass_clearance` holds at every first-step sample. `stop_clearance` holds
    along the straight stopping path `stop_time * velocity` from each sample,
    so an emergency hold anywhere on the step stays clear. Samples must also
    stay the same distances inside `fence`.
    """

    pass_clearance: float
    stop_clearance: float
    stop_time: float = 0.0
    fence: Optional[AABB] = None
