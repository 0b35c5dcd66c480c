from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from explorer.schemas.sensor import CameraModel


@dataclass(frozen=True, eq=False)
class AABB:
    """Axis-aligned box given by its min and max corners (m)."""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self) -> None:
        for name in ("minimum", "maximum"):
            arr = np.array(getattr(self, name), dtype=float).reshape(3)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def is_valid(self) -> bool:
        return bool(np.all(self.minimum < self.maximum))

    @property
    def size(self) -> np.ndarray:
        return self.maximum - self.minimum

    @property
    def volume(self) -> float:
        return float(np.prod(self.size))

    def contains(self, point: np.ndarray) -> bool:
        point = np.asarray(point, dtype=float)
        return bool(np.all(point >= self.minimum) and np.all(point <= self.maximum))

    def encloses(self, other: "AABB") -> bool:
        return bool(np.all(other.minimum >= self.minimum) and np.all(other.maximum <= self.maximum))


@dataclass(frozen=True, eq=False)
class World:
    """Ground truth: solid boxes inside solid bounds faces."""

    bounds: AABB
    boxes: Tuple[AABB, ...] = ()
    box_min: np.ndarray = field(init=False, repr=False)
    box_max: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if self.boxes:
            box_min = np.stack([b.minimum for b in self.boxes])
            box_max = np.stack([b.maximum for b in self.boxes])
        else:
            box_min = np.zeros((0, 3))
            box_max = np.zeros((0, 3))
        box_min.setflags(write=False)
        box_max.setflags(write=False)
        object.__setattr__(self, "box_min", box_min)
        object.__setattr__(self, "box_max", box_max)


@dataclass(frozen=True, eq=False)
class Pose:
    position: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.array(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "rotation", np.array(self.rotation, dtype=float).reshape(3, 3))


@dataclass(frozen=True, eq=False)
class DepthImage:
    """Ranges per ray (rows x cols); NaN marks no return."""

    ranges: np.ndarray
    pose: Pose
    camera: CameraModel

    @property
    def ray_count(self) -> int:
        return int(self.ranges.size)

    @property
    def return_count(self) -> int:
        return int(np.count_nonzero(np.isfinite(self.ranges)))
