"""Box world: text format, raycast depth camera and clearance queries.

The six faces of the world bounds are solid like the boxes, so the floor,
ceiling and perimeter show up in depth images and limit clearance.
"""
import math
import re
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from loguru import logger

from explorer.core.exceptions import NonUnitDirection, WorldParseError, WorldSemanticError
from explorer.core.geometry import symmetric_grid
from explorer.models.world import AABB, DepthImage, Pose, World
from explorer.schemas.sensor import CameraModel

_UNIT_TOLERANCE = 1e-9
_TOKEN = re.compile(r"\S+")


# World documents


def _parse_numbers(tokens: List[Tuple[int, str]], lineno: int) -> List[float]:
    values = []
    for column, token in tokens:
        try:
            value = float(token)
        except ValueError:
            raise WorldParseError(f"expected a number, got '{token}'", lineno, column) from None
        if not math.isfinite(value):
            raise WorldParseError(f"non-finite value '{token}'", lineno, column)
        values.append(value)
    return values


def load_world(text: str) -> World:
    """Parse a world document: one `bounds` line, then any number of `box` lines."""
    bounds: Optional[AABB] = None
    boxes: List[AABB] = []
    last_line = 0
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw_line.split("#", 1)[0]
        tokens = [(m.start() + 1, m.group()) for m in _TOKEN.finditer(line)]
        if not tokens:
            continue
        column, keyword = tokens[0]
        if keyword not in ("bounds", "box"):
            raise WorldParseError(f"unknown directive '{keyword}'", lineno, column)
        if len(tokens) != 7:
            end_column = tokens[-1][0] + len(tokens[-1][1])
            raise WorldParseError(
                f"'{keyword}' takes 6 numbers, got {len(tokens) - 1}", lineno, end_column
            )
        values = _parse_numbers(tokens[1:], lineno)
        box = AABB(minimum=values[:3], maximum=values[3:])

        if keyword == "bounds":
            if bounds is not None:
                raise WorldParseError("duplicate bounds", lineno, column)
            if not box.is_valid:
                raise WorldSemanticError("bounds have inverted extents", lineno)
            bounds = box
            continue

        if bounds is None:
            raise WorldParseError("missing bounds before first box", lineno, column)
        if not box.is_valid:
            raise WorldSemanticError("box has inverted extents", lineno)
        if not bounds.encloses(box):
            raise WorldSemanticError("box lies outside the bounds", lineno)
        boxes.append(box)

    if bounds is None:
        raise WorldParseError("missing bounds", max(last_line, 1), 1)
    return World(bounds=bounds, boxes=tuple(boxes))


def load_world_file(path: Union[str, Path]) -> World:
    world = load_world(Path(path).read_text(encoding="utf-8"))
    logger.info(f"Loaded world '{path}' with {len(world.boxes)} boxes")
    return world


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def dump_world(world: World, header: Optional[str] = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    corners = (*world.bounds.minimum, *world.bounds.maximum)
    lines.append("bounds " + " ".join(_fmt(v) for v in corners))
    for box in world.boxes:
        lines.append("box " + " ".join(_fmt(v) for v in (*box.minimum, *box.maximum)))
    return "\n".join(lines) + "\n"


# Raycasting


def _solids(world: World) -> Tuple[np.ndarray, np.ndarray]:
    """Boxes plus the bounds, which behave as a solid shell."""
    lo = np.vstack([world.box_min, world.bounds.minimum[None, :]])
    hi = np.vstack([world.box_max, world.bounds.maximum[None, :]])
    return lo, hi


def cast_rays(
    world: World, origins: np.ndarray, directions: np.ndarray, max_range: float
) -> np.ndarray:
    """First hit distance for each ray; NaN for no hit within `max_range`.

    A ray starting inside a solid reports where it leaves that solid, so a
    ray from inside the bounds hits the bounds from within.
    """
    origins = np.asarray(origins, dtype=float).reshape(-1, 3)
    directions = np.asarray(directions, dtype=float).reshape(-1, 3)
    lo, hi = _solids(world)

    o = origins[:, None, :]
    d = directions[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo[None] - o) / d
        t2 = (hi[None] - o) / d
    t_lo = np.minimum(t1, t2)
    t_hi = np.maximum(t1, t2)

    parallel = np.broadcast_to(d == 0.0, t_lo.shape)
    inside_slab = (o >= lo[None]) & (o <= hi[None])
    t_lo = np.where(parallel, np.where(inside_slab, -np.inf, np.inf), t_lo)
    t_hi = np.where(parallel, np.where(inside_slab, np.inf, -np.inf), t_hi)

    t_near = t_lo.max(axis=-1)
    t_far = t_hi.min(axis=-1)
    hit = (t_near <= t_far) & (t_far > 0.0)
    t = np.where(t_near > 0.0, t_near, t_far)
    t = np.where(hit, t, np.inf).min(axis=1)
    return np.where(t <= max_range, t, np.nan)


def raycast(
    world: World, origin: np.ndarray, direction: np.ndarray, max_range: float
) -> Optional[float]:
    direction = np.asarray(direction, dtype=float).reshape(3)
    norm = float(np.linalg.norm(direction))
    if abs(norm - 1.0) > _UNIT_TOLERANCE:
        raise NonUnitDirection(f"direction must be unit length, got norm {norm}")
    t = float(cast_rays(world, origin, direction, max_range)[0])
    return None if math.isnan(t) else t


def ray_directions(camera: CameraModel) -> np.ndarray:
    """Body-frame unit rays, shape (rows, cols, 3): x forward, y left, z up.

    Azimuth runs left to right across columns and elevation top to bottom
    across rows, both with uniform angular spacing over the field of view.
    """
    azimuth = symmetric_grid(camera.h_fov / 2.0, camera.ray_cols)[::-1]
    elevation = symmetric_grid(camera.v_fov / 2.0, camera.ray_rows)[::-1]
    el, az = np.meshgrid(elevation, azimuth, indexing="ij")
    return np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)


def render_depth(world: World, pose: Pose, camera: CameraModel) -> DepthImage:
    directions = ray_directions(camera) @ pose.rotation.T
    ranges = cast_rays(world, pose.position, directions.reshape(-1, 3), camera.max_range)
    ranges = ranges.reshape(camera.ray_rows, camera.ray_cols)
    ranges[ranges < camera.min_range] = np.nan
    ranges.setflags(write=False)
    return DepthImage(ranges=ranges, pose=pose, camera=camera)


def depth_to_points(image: DepthImage) -> np.ndarray:
    """World-frame points of every return, shape (k, 3), in row-major ray order."""
    directions = ray_directions(image.camera) @ image.pose.rotation.T
    valid = np.isfinite(image.ranges)
    return image.pose.position + image.ranges[valid][:, None] * directions[valid]


# Clearance


def clearance(world: World, position: np.ndarray) -> float:
    """Distance to the nearest solid surface; negative inside a box or outside the bounds."""
    p = np.asarray(position, dtype=float).reshape(3)
    bounds = world.bounds
    shell = float(min((p - bounds.minimum).min(), (bounds.maximum - p).min()))
    if not world.boxes:
        return shell

    center = (world.box_min + world.box_max) / 2.0
    half = (world.box_max - world.box_min) / 2.0
    q = np.abs(p - center) - half
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
    inside = np.minimum(q.max(axis=1), 0.0)
    return float(min(shell, (outside + inside).min()))
