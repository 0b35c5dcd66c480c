import math

from pydantic import BaseModel, ConfigDict, Field, model_validator


class CameraModel(BaseModel):
    """Depth camera: spherical ray fan over the field of view."""

    model_config = ConfigDict(extra="forbid")

    h_fov_deg: float = Field(60.0, gt=0, lt=180)
    v_fov_deg: float = Field(45.0, gt=0, lt=180)
    min_range: float = Field(0.11, gt=0, description="Closer returns are dropped (m)")
    max_range: float = Field(15.0, gt=0, description="Farther returns are dropped (m)")
    ray_cols: int = Field(64, ge=1, le=640)
    ray_rows: int = Field(48, ge=1, le=480)

    @model_validator(mode="after")
    def _check_ranges(self) -> "CameraModel":
        if self.min_range >= self.max_range:
            raise ValueError("min_range must be below max_range")
        return self

    @property
    def h_fov(self) -> float:
        return math.radians(self.h_fov_deg)

    @property
    def v_fov(self) -> float:
        return math.radians(self.v_fov_deg)
