from dataclasses import dataclass
from typing import Tuple

import numpy as np

from explorer.core.exceptions import IndexOutOfRange
from explorer.models.trajectory import Segment3D
from explorer.schemas.bundle import BundleParams


@dataclass(frozen=True, eq=False)
class SecondStep:
    branch: int
    yaw_offset: float
    segment: Segment3D
    samples: np.ndarray
    sample_times: np.ndarray


@dataclass(frozen=True, eq=False)
class FirstStep:
    row: int
    col: int
    yaw: float
    pitch: float
    segment: Segment3D
    endpoint: np.ndarray
    samples: np.ndarray
    sample_times: np.ndarray
    second_steps: Tuple[SecondStep, ...]


@dataclass(frozen=True, eq=False)
class PeacockBundle:
    """Canonical-frame bundle: start at the origin, heading +X.

    Sample arrays are rectangular: every first step carries the same number
    of samples, and so does every second step.
    """

    params: BundleParams
    start_speed: float
    pitches: np.ndarray
    yaws: np.ndarray
    branch_offsets: np.ndarray
    grid: Tuple[Tuple[FirstStep, ...], ...]
    first_samples: np.ndarray  # (rows, cols, n1, 3)
    first_times: np.ndarray  # (n1,)
    first_velocities: np.ndarray  # (rows, cols, n1, 3)
    second_samples: np.ndarray  # (rows, cols, branches, n2, 3)
    second_times: np.ndarray  # (n2,)

    @property
    def rows(self) -> int:
        return self.params.rows

    @property
    def cols(self) -> int:
        return self.params.cols

    @property
    def first_step_count(self) -> int:
        return sum(len(row) for row in self.grid)

    @property
    def second_step_count(self) -> int:
        return sum(len(step.second_steps) for row in self.grid for step in row)

    @property
    def first_duration(self) -> float:
        return self.grid[0][0].segment.duration

    @property
    def samples_per_family(self) -> int:
        return self.first_samples.shape[2] + self.params.branches * self.second_samples.shape[3]

    def first_step(self, row: int, col: int) -> FirstStep:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise IndexOutOfRange(f"cell ({row}, {col}) outside {self.rows}x{self.cols} grid")
        return self.grid[row][col]


@dataclass(frozen=True, eq=False)
class WorldSamples:
    """Bundle samples rigidly moved to a vehicle pose."""

    first: np.ndarray  # (rows, cols, n1, 3)
    second: np.ndarray  # (rows, cols, branches, n2, 3)
    first_velocities: np.ndarray  # (rows, cols, n1, 3)

    @property
    def rows(self) -> int:
        return self.first.shape[0]

    @property
    def cols(self) -> int:
        return self.first.shape[1]

    def family(self, row: int, col: int) -> Tuple[np.ndarray, np.ndarray]:
        """First-step samples and the stacked second-step samples of one family."""
        return self.first[row, col], self.second[row, col].reshape(-1, 3)
