from dataclasses import dataclass, field

import numpy as np

from explorer.core.exceptions import NonFiniteInput, NonPositiveDuration

POLY_ORDER = 8  # coefficients of a degree-7 polynomial


def _vec3(value) -> np.ndarray:
    arr = np.array(value, dtype=float).reshape(3)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BoundaryState:
    """Position and its first three derivatives at one end of a segment."""

    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    acceleration: np.ndarray = field(default_factory=lambda: np.zeros(3))
    jerk: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        for name in ("position", "velocity", "acceleration", "jerk"):
            object.__setattr__(self, name, _vec3(getattr(self, name)))
        if not np.all(np.isfinite(self.as_matrix())):
            raise NonFiniteInput("boundary state must be finite")

    @classmethod
    def at_rest(cls, position) -> "BoundaryState":
        return cls(position=position)

    def as_matrix(self) -> np.ndarray:
        """Rows are derivative orders 0..3, columns are axes."""
        return np.stack([self.position, self.velocity, self.acceleration, self.jerk])


@dataclass(frozen=True, eq=False)
class Polynomial1D:
    """c_0 + c_1 t + ... + c_7 t^7 on [0, duration]."""

    coefficients: np.ndarray
    duration: float

    def __post_init__(self) -> None:
        coefficients = np.array(self.coefficients, dtype=float)
        if coefficients.shape != (POLY_ORDER,):
            raise ValueError(f"expected {POLY_ORDER} coefficients, got {coefficients.shape}")
        if not self.duration > 0:
            raise NonPositiveDuration(f"duration must be > 0, got {self.duration}")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)


@dataclass(frozen=True, eq=False)
class Segment3D:
    """One minimum-snap piece: per-axis coefficient rows sharing one duration."""

    coefficients: np.ndarray  # shape (3, 8), rows x, y, z
    duration: float

    def __post_init__(self) -> None:
        coefficients = np.array(self.coefficients, dtype=float)
        if coefficients.shape != (3, POLY_ORDER):
            raise ValueError(f"expected (3, {POLY_ORDER}) coefficients, got {coefficients.shape}")
        if not self.duration > 0:
            raise NonPositiveDuration(f"duration must be > 0, got {self.duration}")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def from_axes(cls, x: Polynomial1D, y: Polynomial1D, z: Polynomial1D) -> "Segment3D":
        if not (x.duration == y.duration == z.duration):
            raise ValueError("axis polynomials must share one duration")
        return cls(np.stack([x.coefficients, y.coefficients, z.coefficients]), x.duration)

    @property
    def x(self) -> Polynomial1D:
        return Polynomial1D(self.coefficients[0], self.duration)

    @property
    def y(self) -> Polynomial1D:
        return Polynomial1D(self.coefficients[1], self.duration)

    @property
    def z(self) -> Polynomial1D:
        return Polynomial1D(self.coefficients[2], self.duration)
