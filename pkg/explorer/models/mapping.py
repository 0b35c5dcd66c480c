from dataclasses import dataclass
from typing import NamedTuple, Tuple

Key = Tuple[int, int, int]


class OccupiedVoxel(NamedTuple):
    center: Tuple[float, float, float]
    probability: float
    size: float


@dataclass(frozen=True)
class ScanUpdate:
    """Voxels touched by one scan after per-scan deduplication."""

    hits: int
    misses: int
    rays: int

    @property
    def touched(self) -> int:
        return self.hits + self.misses
