from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

DEFAULT_INERTIA = [[0.029, 0.0, 0.0], [0.0, 0.029, 0.0], [0.0, 0.0, 0.055]]


class VehicleParams(BaseModel):
    """Rigid-body quadrotor model and geometric controller gains.

    Translational gains are per unit mass (k_p = mass * kp), attitude gains
    per unit inertia (M = J(-kr e_R - komega e_w) + w x Jw).
    """

    model_config = ConfigDict(extra="forbid")

    mass: float = Field(1.5, gt=0, description="kg")
    gravity: float = Field(9.81, gt=0, description="m/s^2")
    inertia: List[List[float]] = Field(
        default_factory=lambda: [row[:] for row in DEFAULT_INERTIA],
        description="3x3 body inertia (kg m^2)",
    )
    kp: float = Field(16.0, gt=0, description="Position gain per unit mass (1/s^2)")
    kv: float = Field(5.6, gt=0, description="Velocity gain per unit mass (1/s)")
    kr: float = Field(3600.0, gt=0, description="Attitude gain per unit inertia (1/s^2)")
    komega: float = Field(108.0, gt=0, description="Rate gain per unit inertia (1/s)")

    @field_validator("inertia")
    @classmethod
    def _check_inertia(cls, value: List[List[float]]) -> List[List[float]]:
        matrix = np.asarray(value, dtype=float)
        if matrix.shape != (3, 3):
            raise ValueError("inertia must be 3x3")
        if not np.allclose(matrix, matrix.T):
            raise ValueError("inertia must be symmetric")
        if np.min(np.linalg.eigvalsh(matrix)) <= 0:
            raise ValueError("inertia must be positive definite")
        return [list(map(float, row)) for row in value]

    @property
    def inertia_matrix(self) -> np.ndarray:
        return np.asarray(self.inertia, dtype=float)

    @property
    def k_p(self) -> float:
        return self.mass * self.kp

    @property
    def k_v(self) -> float:
        return self.mass * self.kv
