import math

from pydantic import BaseModel, ConfigDict, Field, model_validator


def logit(p: float) -> float:
    # log(p) - log(1-p) keeps logit(1-p) == -logit(p) bit for bit.
    return math.log(p) - math.log(1.0 - p)


class MapParams(BaseModel):
    """Occupancy octree parameters."""

    model_config = ConfigDict(extra="forbid")

    resolution: float = Field(0.5, gt=0, description="Leaf edge length (m)")
    hit_prob: float = Field(0.65, gt=0, lt=1)
    miss_prob: float = Field(0.35, gt=0, lt=1)
    occupancy_threshold: float = Field(0.5, gt=0, lt=1)
    clamp_min: float = Field(0.12, gt=0, lt=1)
    clamp_max: float = Field(0.97, gt=0, lt=1)
    max_depth: int = Field(16, ge=1, le=21, description="Tree levels below the root")
    query_depth: int = Field(15, ge=1, description="Levels descended by planner queries")

    @model_validator(mode="after")
    def _check_ordering(self) -> "MapParams":
        if not (self.miss_prob < 0.5 < self.hit_prob):
            raise ValueError("requires miss_prob < 0.5 < hit_prob")
        if not (self.clamp_min < 0.5 < self.clamp_max):
            raise ValueError("requires clamp_min < 0.5 < clamp_max")
        if self.query_depth > self.max_depth:
            raise ValueError("query_depth must not exceed max_depth")
        return self

    @property
    def hit_log_odds(self) -> float:
        return logit(self.hit_prob)

    @property
    def miss_log_odds(self) -> float:
        return logit(self.miss_prob)

    @property
    def threshold_log_odds(self) -> float:
        return logit(self.occupancy_threshold)

    @property
    def clamp_min_log_odds(self) -> float:
        return logit(self.clamp_min)

    @property
    def clamp_max_log_odds(self) -> float:
        return logit(self.clamp_max)

    @property
    def voxel_volume(self) -> float:
        return self.resolution**3
