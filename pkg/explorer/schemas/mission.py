from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class MissionMode(str, Enum):
    DYNAMIC = "dynamic"
    KINEMATIC = "kinematic"


class MissionOutcome(str, Enum):
    COMPLETED = "completed"
    STALLED = "stalled"
    TIMED_OUT = "timed_out"
    COLLISION_FAILURE = "collision_failure"

    @property
    def is_success(self) -> bool:
        return self in (MissionOutcome.COMPLETED, MissionOutcome.STALLED)


class MissionConfig(BaseModel):
    """Exploration loop settings."""

    model_config = ConfigDict(extra="forbid")

    takeoff_altitude: float = Field(2.0, gt=0, description="m above the floor")
    takeoff_duration: float = Field(2.0, gt=0, description="s")
    max_mission_time: float = Field(180.0, gt=0, description="Simulated seconds")
    goal_center: Optional[Tuple[float, float, float]] = None
    goal_radius: Optional[float] = Field(None, gt=0)
    stall_cycles: int = Field(5, ge=1)
    vehicle_radius: float = Field(0.4, gt=0, description="m")
    abort_clearance_factor: float = Field(
        2.0, ge=1, description="Abort a segment when clearance < factor * radius"
    )
    abort_margin: float = Field(
        0.15, ge=0, description="Clearance past the radius left after an emergency stop (m)"
    )
    tracking_margin: float = Field(
        0.15, ge=0, description="Planned clearance for tracking error, dynamic mode (m)"
    )
    recovery_yaw_deg: float = Field(45.0, description="Yaw step per blocked cycle")
    mode: MissionMode = MissionMode.DYNAMIC
    seed: int = 0
    start_xy: Optional[Tuple[float, float]] = None
    initial_yaw_deg: Optional[float] = None
    sim_dt: float = Field(0.001, gt=0, le=0.01, description="Integrator step (s)")
    control_rate: float = Field(200.0, ge=100, description="Hz")
    record_wall_time: bool = False
    land_on_finish: bool = False

    @model_validator(mode="after")
    def _check_goal(self) -> "MissionConfig":
        if (self.goal_center is None) != (self.goal_radius is None):
            raise ValueError("goal_center and goal_radius must be set together")
        return self


class MissionSummary(BaseModel):
    """Aggregate results of one run."""

    duration_s: float = 0.0
    flight_length_m: float = 0.0
    avg_velocity_mps: float = 0.0
    free_volume_m3: float = 0.0
    occupied_volume_m3: float = 0.0
    mapped_volume_m3: float = 0.0
    avg_mapping_rate_m3ps: float = 0.0
    mapping_efficiency_m3pm: float = 0.0
    outcome: Optional[MissionOutcome] = None
    cycles: int = 0
    recoveries: int = 0
    min_clearance_m: Optional[float] = None
