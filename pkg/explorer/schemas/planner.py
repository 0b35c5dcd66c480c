from pydantic import BaseModel, ConfigDict, Field, model_validator


class ScoreWeights(BaseModel):
    """Per-sample rewards: `a` for free space, `b` for unknown space."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    a: float = Field(1.0, gt=0)
    b: float = Field(3.0, gt=0)

    @model_validator(mode="after")
    def _check_order(self) -> "ScoreWeights":
        if not self.b > self.a:
            raise ValueError("unknown weight b must exceed free weight a")
        return self


class PlannerConfig(BaseModel):
    """Scoring policy switches."""

    model_config = ConfigDict(extra="forbid")

    a: float = Field(1.0, gt=0, description="Score per free sample")
    b: float = Field(3.0, gt=0, description="Score per unknown sample")
    second_step_blocks: bool = Field(
        True, description="Occupied second-step samples disqualify their family"
    )
    literal_reset: bool = Field(
        False, description="Reset score to 0 on Occupied and keep accumulating"
    )
    clearance_margin: float = Field(
        0.5, ge=0, description="Axis probe distance around first-step samples (m)"
    )
    safety_gate: bool = Field(
        True, description="Block families whose first step breaks the mission safety envelope"
    )
    workers: int = Field(1, ge=1, description="Threads scoring families in parallel")

    @model_validator(mode="after")
    def _check_order(self) -> "PlannerConfig":
        if not self.b > self.a:
            raise ValueError("unknown weight b must exceed free weight a")
        return self

    @property
    def weights(self) -> ScoreWeights:
        return ScoreWeights(a=self.a, b=self.b)
