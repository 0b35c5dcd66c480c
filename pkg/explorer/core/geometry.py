"""Small rigid-body helpers shared across services."""
import math

import numpy as np
from scipy.spatial.transform import Rotation

E3 = np.array([0.0, 0.0, 1.0])


def yaw_matrix(yaw: float) -> np.ndarray:
    """Rotation about world Z by `yaw` radians."""
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def yaw_of(rotation: np.ndarray) -> float:
    """Heading (ZYX yaw) of a body-to-world rotation matrix."""
    return float(Rotation.from_matrix(rotation).as_euler("ZYX")[0])


def hat(w: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def vee(m: np.ndarray) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def symmetric_grid(half_range: float, count: int) -> np.ndarray:
    """`count` values spanning [-half_range, half_range] inclusive; [0] for one."""
    if count == 1:
        return np.zeros(1)
    return np.linspace(-half_range, half_range, count)


def horizontal_heading(velocity: np.ndarray, fallback: float, min_speed: float = 0.1) -> float:
    """Heading of the horizontal part of `velocity`, or `fallback` when slow."""
    vx, vy = float(velocity[0]), float(velocity[1])
    if math.hypot(vx, vy) < min_speed:
        return fallback
    return math.atan2(vy, vx)


def wrap_angle(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi
