"""Probabilistic occupancy octree.

Voxels are addressed by integer keys: floor(x / resolution) shifted by half the
key range, so the tree is centred on the world origin. Leaves sit at
`max_depth`; inner nodes carry the maximum log-odds of their children, which
makes a depth-limited lookup report Occupied when any descendant is occupied.
Eight identical leaf children are pruned into their parent and expanded again
on the next update that touches them.
"""
import math
from typing import Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np
from loguru import logger
from scipy.special import expit

from explorer.core.config import ensure_valid
from explorer.core.exceptions import InvalidParams, OriginOutOfBounds
from explorer.models.mapping import Key, OccupiedVoxel, ScanUpdate
from explorer.models.planning import CellState
from explorer.models.world import AABB, World
from explorer.schemas.voxmap import MapParams


class _Node:
    __slots__ = ("children", "log_odds")

    def __init__(self, log_odds: Optional[float] = None, children: Optional[list] = None):
        self.children = children
        self.log_odds = log_odds


def _spread_bits(v: int) -> int:
    v &= 0x1FFFFF
    v = (v | v << 32) & 0x1F00000000FFFF
    v = (v | v << 16) & 0x1F0000FF0000FF
    v = (v | v << 8) & 0x100F00F00F00F00F
    v = (v | v << 4) & 0x10C30C30C30C30C3
    v = (v | v << 2) & 0x1249249249249249
    return v


def morton_code(key: Key) -> int:
    """Z-order index of a voxel key (x in the lowest bit)."""
    return _spread_bits(key[0]) | _spread_bits(key[1]) << 1 | _spread_bits(key[2]) << 2


class OccupancyOctree:
    """Log-odds occupancy octree bounded by a world-anchored box."""

    def __init__(self, params: MapParams, bounds: Optional[AABB] = None):
        self.params = ensure_valid(params)
        self.resolution = self.params.resolution
        self.max_depth = self.params.max_depth
        self._key_offset = 1 << (self.max_depth - 1)
        self._key_limit = 1 << self.max_depth

        self._hit = self.params.hit_log_odds
        self._miss = self.params.miss_log_odds
        self._lo_min = self.params.clamp_min_log_odds
        self._lo_max = self.params.clamp_max_log_odds
        self._threshold = self.params.threshold_log_odds

        if bounds is None:
            half = self._key_offset * self.resolution
            bounds = AABB(minimum=[-half] * 3, maximum=[half] * 3)
        if not bounds.is_valid:
            raise InvalidParams("map bounds must have min < max on every axis")
        self.bounds = bounds
        lo = np.floor(bounds.minimum / self.resolution).astype(np.int64) + self._key_offset
        hi = np.ceil(bounds.maximum / self.resolution).astype(np.int64) - 1 + self._key_offset
        self._key_min = np.clip(lo, 0, self._key_limit - 1)
        self._key_max = np.clip(hi, 0, self._key_limit - 1)
        self._kmin: Key = (int(self._key_min[0]), int(self._key_min[1]), int(self._key_min[2]))
        self._kmax: Key = (int(self._key_max[0]), int(self._key_max[1]), int(self._key_max[2]))

        self._root: Optional[_Node] = None
        self._free_voxels = 0
        self._occupied_voxels = 0

    @classmethod
    def for_world(cls, params: MapParams, world: World) -> "OccupancyOctree":
        """Map covering the world bounds plus one voxel all round, so surface hits land inside."""
        pad = params.resolution
        bounds = AABB(minimum=world.bounds.minimum - pad, maximum=world.bounds.maximum + pad)
        return cls(params, bounds)

    # Keys

    def coord_to_key(self, point: Sequence[float]) -> Key:
        res, off = self.resolution, self._key_offset
        return (
            int(math.floor(point[0] / res)) + off,
            int(math.floor(point[1] / res)) + off,
            int(math.floor(point[2] / res)) + off,
        )

    def keys_of(self, points: np.ndarray) -> np.ndarray:
        """Vectorized `coord_to_key` for an (n, 3) array."""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        return np.floor(points / self.resolution).astype(np.int64) + self._key_offset

    def key_to_coord(self, key: Key) -> Tuple[float, float, float]:
        """Centre of the leaf voxel with this key."""
        res, off = self.resolution, self._key_offset
        return ((key[0] - off + 0.5) * res, (key[1] - off + 0.5) * res, (key[2] - off + 0.5) * res)

    def key_in_bounds(self, key: Key) -> bool:
        lo, hi = self._kmin, self._kmax
        return (
            lo[0] <= key[0] <= hi[0] and lo[1] <= key[1] <= hi[1] and lo[2] <= key[2] <= hi[2]
        )

    def in_bounds(self, point: Sequence[float]) -> bool:
        return self.key_in_bounds(self.coord_to_key(point))

    def compute_ray_keys(self, origin: Sequence[float], end: Sequence[float]) -> List[Key]:
        """Voxels crossed from `origin` up to, not including, the voxel holding `end`.

        The origin voxel is included unless it also holds `end`.
        """
        key_origin = self.coord_to_key(origin)
        key_end = self.coord_to_key(end)
        if key_origin == key_end:
            return []

        o = [float(origin[0]), float(origin[1]), float(origin[2])]
        d = [float(end[0]) - o[0], float(end[1]) - o[1], float(end[2]) - o[2]]
        length = math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
        d = [c / length for c in d]

        res, off = self.resolution, self._key_offset
        step = [0, 0, 0]
        t_max = [math.inf] * 3
        t_delta = [math.inf] * 3
        for i in range(3):
            if d[i] > 0.0:
                step[i] = 1
                border = (key_origin[i] - off + 1) * res
                t_max[i] = (border - o[i]) / d[i]
                t_delta[i] = res / d[i]
            elif d[i] < 0.0:
                step[i] = -1
                border = (key_origin[i] - off) * res
                t_max[i] = (border - o[i]) / d[i]
                t_delta[i] = -res / d[i]

        keys = [key_origin]
        current = list(key_origin)
        # every step crosses one face, so the walk is bounded by the Manhattan key distance
        for _ in range(sum(abs(a - b) for a, b in zip(key_origin, key_end)) + 3):
            if t_max[0] < t_max[1]:
                dim = 0 if t_max[0] < t_max[2] else 2
            else:
                dim = 1 if t_max[1] < t_max[2] else 2
            current[dim] += step[dim]
            t_max[dim] += t_delta[dim]
            key = (current[0], current[1], current[2])
            if key == key_end:
                break
            if min(t_max) > length:
                break
            keys.append(key)
        return keys

    # Updates

    def _state_of(self, log_odds: Optional[float]) -> CellState:
        if log_odds is None:
            return CellState.UNKNOWN
        return CellState.OCCUPIED if log_odds > self._threshold else CellState.FREE

    def _count(self, log_odds: Optional[float], sign: int) -> None:
        state = self._state_of(log_odds)
        if state is CellState.OCCUPIED:
            self._occupied_voxels += sign
        elif state is CellState.FREE:
            self._free_voxels += sign

    def _saturated(self, log_odds: Optional[float], delta: float) -> bool:
        if log_odds is None:
            return False
        return (delta > 0 and log_odds >= self._lo_max) or (delta < 0 and log_odds <= self._lo_min)

    def update_key(self, key: Key, delta: float) -> None:
        """Add `delta` to one leaf's log-odds (clamped) and refresh its ancestors."""
        depth = self.max_depth
        if self._root is None:
            self._root = _Node(children=[None] * 8)
        node = self._root
        path: List[_Node] = []
        for level in range(depth):
            if node.children is None:
                # pruned: all voxels below share this value
                if self._saturated(node.log_odds, delta):
                    return
                node.children = [_Node(node.log_odds) for _ in range(8)]
            path.append(node)
            shift = depth - 1 - level
            index = (
                ((key[0] >> shift) & 1)
                | (((key[1] >> shift) & 1) << 1)
                | (((key[2] >> shift) & 1) << 2)
            )
            child = node.children[index]
            if child is None:
                child = _Node(None, [None] * 8 if level + 1 < depth else None)
                node.children[index] = child
            node = child

        before = node.log_odds
        if self._saturated(before, delta):
            return
        after = (0.0 if before is None else before) + delta
        after = min(max(after, self._lo_min), self._lo_max)
        node.log_odds = after
        self._count(before, -1)
        self._count(after, +1)

        prunable = True
        for parent in reversed(path):
            children = parent.children
            if prunable:
                first = children[0]
                prunable = first is not None and first.children is None and all(
                    c is not None and c.children is None and c.log_odds == first.log_odds
                    for c in children
                )
                if prunable:
                    parent.children = None
                    parent.log_odds = first.log_odds
                    continue
            parent.log_odds = max(c.log_odds for c in children if c is not None)

    def insert_scan(
        self, origin: Sequence[float], endpoints: Iterable[Sequence[float]], max_range: float
    ) -> ScanUpdate:
        """Integrate one point cloud taken from `origin`.

        Endpoints within `max_range` are hits and carve free space along their
        ray; farther endpoints only carve free space up to `max_range`. Each
        voxel gets at most one miss and one hit per scan; a hit wins.
        """
        if not self.in_bounds(origin):
            raise OriginOutOfBounds(f"scan origin {tuple(origin)} lies outside the map bounds")
        o = np.asarray(origin, dtype=float).reshape(3)
        hits: Set[Key] = set()
        misses: Set[Key] = set()
        rays = 0
        for end in endpoints:
            end = np.asarray(end, dtype=float).reshape(3)
            ray = end - o
            distance = float(np.linalg.norm(ray))
            rays += 1
            if distance > max_range:
                end = o + ray * (max_range / distance)
                is_hit = False
            else:
                is_hit = True
            misses.update(self.compute_ray_keys(o, end))
            if is_hit:
                key = self.coord_to_key(end)
                if self.key_in_bounds(key):
                    hits.add(key)

        misses = {k for k in misses if k not in hits and self.key_in_bounds(k)}
        for key in sorted(misses):
            self.update_key(key, self._miss)
        for key in sorted(hits):
            self.update_key(key, self._hit)
        logger.debug(f"Scan of {rays} rays: {len(hits)} hit voxels, {len(misses)} miss voxels")
        return ScanUpdate(hits=len(hits), misses=len(misses), rays=rays)

    # Queries

    def _child_index(self, key: Key, level: int) -> int:
        shift = self.max_depth - 1 - level
        return (
            ((key[0] >> shift) & 1)
            | (((key[1] >> shift) & 1) << 1)
            | (((key[2] >> shift) & 1) << 2)
        )

    def search_key_with_visits(
        self, key: Key, depth: Optional[int] = None
    ) -> Tuple[CellState, int]:
        if depth is None:
            depth = self.max_depth
        if not 0 <= depth <= self.max_depth:
            raise InvalidParams(f"search depth must be in 0..{self.max_depth}, got {depth}")
        node = self._root
        if node is None or not self.key_in_bounds(key):
            return CellState.UNKNOWN, 0
        visits = 0
        for level in range(depth):
            if node.children is None:
                break
            node = node.children[self._child_index(key, level)]
            visits += 1
            if node is None:
                return CellState.UNKNOWN, visits
        return self._state_of(node.log_odds), visits

    def search_with_visits(
        self, point: Sequence[float], depth: Optional[int] = None
    ) -> Tuple[CellState, int]:
        """Tri-state lookup descending at most `depth` levels, plus the levels descended."""
        return self.search_key_with_visits(self.coord_to_key(point), depth)

    def search(self, point: Sequence[float], depth: Optional[int] = None) -> CellState:
        return self.search_with_visits(point, depth)[0]

    def search_many(self, points: np.ndarray, depth: Optional[int] = None) -> List[CellState]:
        """States of an (n, 3) array of points, in order."""
        keys = self.keys_of(points).tolist()
        return [self.search_key_with_visits((k[0], k[1], k[2]), depth)[0] for k in keys]

    def log_odds_at(self, point: Sequence[float]) -> Optional[float]:
        """Leaf (or pruned ancestor) log-odds at a point; None when unknown."""
        key = self.coord_to_key(point)
        node = self._root
        if node is None or not self.key_in_bounds(key):
            return None
        for level in range(self.max_depth):
            if node.children is None:
                break
            node = node.children[self._child_index(key, level)]
            if node is None:
                return None
        return node.log_odds

    # Accounting

    def mapped_volumes(self) -> Tuple[float, float]:
        """(free, occupied) volume in m^3 from the incremental voxel counters."""
        volume = self.params.voxel_volume
        return self._free_voxels * volume, self._occupied_voxels * volume

    @property
    def known_volume(self) -> float:
        free, occupied = self.mapped_volumes()
        return free + occupied

    def _iter_leaves(self) -> Iterator[Tuple[Key, int, float]]:
        """(min key, level, log-odds) of every stored leaf, pruned nodes included."""
        if self._root is None:
            return
        stack: List[Tuple[_Node, int, Key]] = [(self._root, 0, (0, 0, 0))]
        while stack:
            node, level, base = stack.pop()
            if node.children is None:
                yield base, level, node.log_odds
                continue
            half = 1 << (self.max_depth - 1 - level)
            for index, child in enumerate(node.children):
                if child is None:
                    continue
                child_base = (
                    base[0] + (half if index & 1 else 0),
                    base[1] + (half if index & 2 else 0),
                    base[2] + (half if index & 4 else 0),
                )
                stack.append((child, level + 1, child_base))

    def known_volume_within(self, box: AABB) -> float:
        """Known (free or occupied) volume in m^3 that overlaps `box`."""
        res, off = self.resolution, self._key_offset
        total = 0.0
        for base, level, _ in self._iter_leaves():
            size = (1 << (self.max_depth - level)) * res
            lo = (np.asarray(base, dtype=float) - off) * res
            overlap = np.minimum(lo + size, box.maximum) - np.maximum(lo, box.minimum)
            total += float(np.prod(np.clip(overlap, 0.0, None)))
        return total

    def tally_volumes(self) -> Tuple[float, float]:
        """(free, occupied) volume recomputed by walking the tree."""
        free = occupied = 0
        for _, level, log_odds in self._iter_leaves():
            voxels = 8 ** (self.max_depth - level)
            if log_odds > self._threshold:
                occupied += voxels
            else:
                free += voxels
        volume = self.params.voxel_volume
        return free * volume, occupied * volume

    def export_occupied(self) -> List[OccupiedVoxel]:
        """Occupied leaves as (centre, probability, edge length), in Z-order of their keys."""
        found = []
        for base, level, log_odds in self._iter_leaves():
            if log_odds > self._threshold:
                found.append((morton_code(base), base, level, log_odds))
        found.sort(key=lambda item: item[0])

        res, off = self.resolution, self._key_offset
        voxels = []
        for _, base, level, log_odds in found:
            cells = 1 << (self.max_depth - level)
            size = cells * res
            center = (
                (base[0] - off) * res + 0.5 * size,
                (base[1] - off) * res + 0.5 * size,
                (base[2] - off) * res + 0.5 * size,
            )
            voxels.append(OccupiedVoxel(center, float(expit(log_odds)), size))
        return voxels

    def node_count(self) -> int:
        if self._root is None:
            return 0
        count = 0
        stack = [self._root]
        while stack:
            node = stack.pop()
            count += 1
            if node.children is not None:
                stack.extend(c for c in node.children if c is not None)
        return count
