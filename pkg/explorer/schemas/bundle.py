import math

from pydantic import BaseModel, ConfigDict, Field


class BundleParams(BaseModel):
    """Parameters of the precomputed peacock bundle."""

    model_config = ConfigDict(extra="forbid")

    speed: float = Field(5.0, gt=0, description="Linear speed v (m/s)")
    period: float = Field(0.5, gt=0, description="Segment period T (s)")
    rows: int = Field(9, ge=1, description="Pitch samples (grid rows)")
    cols: int = Field(9, ge=1, description="Yaw samples (grid columns)")
    branches: int = Field(7, ge=1, description="Second-step yaw samples per first step")
    yaw_range_deg: float = Field(60.0, ge=0, lt=180, description="Half-range of first-step yaw")
    pitch_range_deg: float = Field(40.0, ge=0, lt=90, description="Half-range of first-step pitch")
    branch_yaw_range_deg: float = Field(
        27.0, ge=0, lt=180, description="Half-range of the second-step yaw offsets"
    )
    sample_spacing: float = Field(
        0.25, gt=0, description="Maximum distance between cached collision samples (m)"
    )

    @property
    def yaw_range(self) -> float:
        return math.radians(self.yaw_range_deg)

    @property
    def pitch_range(self) -> float:
        return math.radians(self.pitch_range_deg)

    @property
    def branch_yaw_range(self) -> float:
        return math.radians(self.branch_yaw_range_deg)

    @property
    def step_length(self) -> float:
        return self.speed * self.period
