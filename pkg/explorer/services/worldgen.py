"""Seeded maze worlds.

A randomized depth-first search carves a spanning tree through a square cell
grid, a share of the remaining walls is knocked out to add loops, and some
open passages get a half wall that must be flown over or under.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Tuple, Union

import numpy as np
from loguru import logger

from explorer.core.exceptions import InvalidParams
from explorer.models.world import AABB, World

WALL_THICKNESS = 0.5
EXTRA_OPENING_RATE = 0.2
HALF_WALL_RATE = 0.3

Cell = Tuple[int, int]
Edge = Tuple[Cell, Cell]


class WorldKind(str, Enum):
    DESK = "desk"
    FULL = "full"


@dataclass(frozen=True)
class MazeLayout:
    size: float
    height: float
    cell: float
    low_wall_top: float
    hanging_wall_bottom: float

    @property
    def cells(self) -> int:
        return int(round(self.size / self.cell))


LAYOUTS: Dict[WorldKind, MazeLayout] = {
    WorldKind.DESK: MazeLayout(
        size=20.0, height=4.0, cell=5.0, low_wall_top=1.0, hanging_wall_bottom=3.0
    ),
    WorldKind.FULL: MazeLayout(
        size=90.0, height=8.0, cell=10.0, low_wall_top=4.0, hanging_wall_bottom=4.0
    ),
}

START_OFFSET = (2.5, 2.5)


def _carve(n: int, rng: np.random.Generator) -> set:
    """Open edges of a random spanning tree over an n x n grid."""
    visited = {(0, 0)}
    stack: List[Cell] = [(0, 0)]
    opened = set()
    while stack:
        x, y = stack[-1]
        neighbours = [
            (x + dx, y + dy)
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
            if 0 <= x + dx < n and 0 <= y + dy < n and (x + dx, y + dy) not in visited
        ]
        if not neighbours:
            stack.pop()
            continue
        nxt = neighbours[int(rng.integers(len(neighbours)))]
        opened.add(tuple(sorted(((x, y), nxt))))
        visited.add(nxt)
        stack.append(nxt)
    return opened


def _all_edges(n: int) -> List[Edge]:
    edges = []
    for x in range(n):
        for y in range(n):
            if x + 1 < n:
                edges.append(((x, y), (x + 1, y)))
            if y + 1 < n:
                edges.append(((x, y), (x, y + 1)))
    return edges


def _wall_box(edge: Edge, layout: MazeLayout, z0: float, z1: float) -> AABB:
    (x0, y0), (x1, y1) = edge
    c = layout.cell
    if x1 != x0:
        # wall on the line x = x1 * cell, across the cell row y0
        xw = x1 * c
        return AABB(minimum=(xw - WALL_THICKNESS, y0 * c, z0), maximum=(xw, (y0 + 1) * c, z1))
    yw = y1 * c
    return AABB(minimum=(x0 * c, yw - WALL_THICKNESS, z0), maximum=((x0 + 1) * c, yw, z1))


def generate_world(kind: Union[WorldKind, str], seed: int) -> World:
    """Deterministic maze for (`kind`, `seed`); the world origin is the bounds minimum."""
    try:
        kind = WorldKind(kind)
    except ValueError:
        raise InvalidParams(f"unknown world kind '{kind}'") from None
    layout = LAYOUTS[kind]
    rng = np.random.default_rng(seed)
    n = layout.cells

    opened = _carve(n, rng)
    boxes = []
    half_walls = 0
    for edge in _all_edges(n):
        if edge not in opened and rng.random() >= EXTRA_OPENING_RATE:
            boxes.append(_wall_box(edge, layout, 0.0, layout.height))
            continue
        if rng.random() < HALF_WALL_RATE:
            if rng.random() < 0.5:
                boxes.append(_wall_box(edge, layout, 0.0, layout.low_wall_top))
            else:
                boxes.append(_wall_box(edge, layout, layout.hanging_wall_bottom, layout.height))
            half_walls += 1

    world = World(
        bounds=AABB(minimum=(0.0, 0.0, 0.0), maximum=(layout.size, layout.size, layout.height)),
        boxes=tuple(boxes),
    )
    logger.info(
        f"Generated {kind.value} maze (seed {seed}): {len(boxes)} walls, {half_walls} half walls"
    )
    return world


def default_start(world: World) -> np.ndarray:
    """Floor-level start point in the first maze cell."""
    return world.bounds.minimum + np.array([START_OFFSET[0], START_OFFSET[1], 0.0])
