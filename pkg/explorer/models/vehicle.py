from dataclasses import dataclass, field
from typing import List

import numpy as np


def _arr(value, shape) -> np.ndarray:
    return np.array(value, dtype=float).reshape(shape)


@dataclass(frozen=True, eq=False)
class VehicleState:
    """p, v in the world frame; R maps body to world; omega in the body frame."""

    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _arr(self.p, 3))
        object.__setattr__(self, "v", _arr(self.v, 3))
        object.__setattr__(self, "R", _arr(self.R, (3, 3)))
        object.__setattr__(self, "omega", _arr(self.omega, 3))

    @property
    def orthonormality_error(self) -> float:
        return float(np.linalg.norm(self.R.T @ self.R - np.eye(3)))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.v, self.R.ravel(), self.omega])

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "VehicleState":
        return cls(p=x[0:3], v=x[3:6], R=x[6:15].reshape(3, 3), omega=x[15:18])


@dataclass(frozen=True, eq=False)
class ControlInput:
    f: float  # collective thrust along body z (N)
    M: np.ndarray  # body moment (N m)


@dataclass(frozen=True, eq=False)
class FlatTarget:
    p_d: np.ndarray
    v_d: np.ndarray
    a_d: np.ndarray
    yaw_d: float = 0.0


@dataclass(frozen=True, eq=False)
class TrackTick:
    t: float
    state: VehicleState
    target: FlatTarget
    control: ControlInput
    position_error: float


@dataclass(eq=False)
class TrackResult:
    ticks: List[TrackTick]
    final_state: VehicleState
    max_position_error: float
    aborted: bool = False

    @property
    def states(self) -> List[VehicleState]:
        return [tick.state for tick in self.ticks]
