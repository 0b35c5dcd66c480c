"""Best-path selection over a peacock bundle.

Every (row, col) family is scored by looking up each of its samples in the
map: free samples earn `a`, unknown samples earn `b` and an occupied sample
disqualifies the whole family. The highest score wins; ties go to the median
of the tied rows and columns.
"""
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.spatial import KDTree

from explorer.core.geometry import yaw_of
from explorer.models.bundle import PeacockBundle, WorldSamples
from explorer.models.mapping import OccupiedVoxel
from explorer.models.planning import (
    CellState,
    PlanDecision,
    PlanResult,
    SafetyEnvelope,
    ScoreMatrix,
)
from explorer.models.world import AABB, Pose
from explorer.schemas.planner import PlannerConfig, ScoreWeights
from explorer.services.peacock import selected_world_segment, transform_bundle_samples
from explorer.services.voxmap import OccupancyOctree

FREE = CellState.FREE
UNKNOWN = CellState.UNKNOWN
OCCUPIED = CellState.OCCUPIED

# Points checked along each stopping path, as fractions of its length.
STOP_FRACTIONS = (0.25, 0.5, 0.75, 1.0)


def probe_offsets(resolution: float, margin: float) -> np.ndarray:
    """Axis-aligned offsets k * resolution (k >= 1) out to `margin`, both directions."""
    steps = int(np.floor(margin / resolution + 1e-9))
    offsets = []
    for k in range(1, steps + 1):
        for axis in range(3):
            for sign in (1.0, -1.0):
                offset = np.zeros(3)
                offset[axis] = sign * k * resolution
                offsets.append(offset)
    return np.array(offsets).reshape(-1, 3)


def obstacle_clearance(
    points: np.ndarray, voxels: Sequence[OccupiedVoxel], reach: float
) -> np.ndarray:
    """Distance from each point to the nearest occupied voxel box, capped at `reach`."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    gaps = np.full(len(points), float(reach))
    if not voxels or not len(points):
        return gaps
    centers = np.array([voxel.center for voxel in voxels], dtype=float)
    half = 0.5 * np.array([voxel.size for voxel in voxels], dtype=float)
    tree = KDTree(centers)
    radius = reach + float(half.max()) * math.sqrt(3.0)
    for index, nearby in enumerate(tree.query_ball_point(points, radius)):
        if nearby:
            q = np.abs(points[index] - centers[nearby]) - half[nearby, None]
            nearest = float(np.linalg.norm(np.maximum(q, 0.0), axis=1).min())
            gaps[index] = min(nearest, reach)
    return gaps


def fence_clearance(points: np.ndarray, fence: AABB) -> np.ndarray:
    """Distance from each point to the nearest fence face; negative outside."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    return np.minimum(points - fence.minimum, fence.maximum - points).min(axis=1)


def unsafe_families(
    samples: WorldSamples, voxels: Sequence[OccupiedVoxel], envelope: SafetyEnvelope
) -> np.ndarray:
    """(rows, cols) mask of families whose first step breaks the envelope."""
    rows, cols, count, _ = samples.first.shape
    points = samples.first.reshape(-1, 3)
    travel = envelope.stop_time * samples.first_velocities.reshape(-1, 3)
    stops = np.concatenate([points + fraction * travel for fraction in STOP_FRACTIONS])

    reach = max(envelope.pass_clearance, envelope.stop_clearance)
    pass_gap = obstacle_clearance(points, voxels, reach)
    stop_gap = obstacle_clearance(stops, voxels, reach)
    if envelope.fence is not None:
        pass_gap = np.minimum(pass_gap, fence_clearance(points, envelope.fence))
        stop_gap = np.minimum(stop_gap, fence_clearance(stops, envelope.fence))

    too_close = pass_gap < envelope.pass_clearance
    overrun = (stop_gap < envelope.stop_clearance).reshape(len(STOP_FRACTIONS), -1).any(axis=0)
    return (too_close | overrun).reshape(rows, cols, count).any(axis=-1)


def score_family(
    octree: OccupancyOctree,
    first: np.ndarray,
    second: np.ndarray,
    weights: ScoreWeights,
    query_depth: int,
    *,
    second_step_blocks: bool = True,
    literal_reset: bool = False,
    probes: Optional[np.ndarray] = None,
) -> Tuple[float, bool]:
    """(score, blocked) of one family; first-step samples are visited before second-step ones."""
    a, b = weights.a, weights.b
    score = 0.0
    first_states = octree.search_many(first, query_depth)
    probe_states: List[List[CellState]] = []
    if probes is not None and len(probes):
        probed = first[:, None, :] + probes[None, :, :]
        flat = octree.search_many(probed.reshape(-1, 3), query_depth)
        width = len(probes)
        probe_states = [flat[i * width : (i + 1) * width] for i in range(len(first))]

    for index, state in enumerate(first_states):
        if state is OCCUPIED or (probe_states and OCCUPIED in probe_states[index]):
            if not literal_reset:
                return 0.0, True
            score = 0.0
            if state is OCCUPIED:
                continue
        if state is FREE:
            score += a
        elif state is UNKNOWN:
            score += b

    for state in octree.search_many(second, query_depth):
        if state is OCCUPIED:
            if literal_reset:
                score = 0.0
            elif second_step_blocks:
                return 0.0, True
        elif state is FREE:
            score += a
        else:
            score += b
    return score, False


def score_bundle(
    octree: OccupancyOctree,
    samples: WorldSamples,
    weights: ScoreWeights,
    query_depth: int,
    *,
    second_step_blocks: bool = True,
    literal_reset: bool = False,
    clearance_margin: float = 0.0,
    workers: int = 1,
    excluded: Optional[np.ndarray] = None,
) -> ScoreMatrix:
    """Score every family; cells set in the `excluded` mask are blocked without a lookup."""
    rows, cols = samples.rows, samples.cols
    probes = probe_offsets(octree.resolution, clearance_margin) if clearance_margin > 0 else None
    cells = [(r, c) for r in range(rows) for c in range(cols)]

    def _score(cell: Tuple[int, int]) -> Tuple[float, bool]:
        if excluded is not None and excluded[cell]:
            return 0.0, True
        first, second = samples.family(*cell)
        return score_family(
            octree,
            first,
            second,
            weights,
            query_depth,
            second_step_blocks=second_step_blocks,
            literal_reset=literal_reset,
            probes=probes,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_score, cells))
    else:
        results = [_score(cell) for cell in cells]

    scores = np.array([s for s, _ in results], dtype=float).reshape(rows, cols)
    blocked = np.array([blk for _, blk in results], dtype=bool).reshape(rows, cols)
    return ScoreMatrix(scores=scores, blocked=blocked)


def select_best(matrix: ScoreMatrix) -> PlanDecision:
    """Unique maximum, or the lower-median row and column of the tied maxima.

    When the median cell is itself blocked or scores 0, the tied cell closest
    to it (Manhattan distance, then row, then column) is taken instead.
    """
    scores, blocked = matrix.scores, matrix.blocked
    eligible = ~blocked & (scores > 0.0)
    if not eligible.any():
        return PlanDecision.all_blocked()

    best = scores[eligible].max()
    tied = np.argwhere(eligible & (scores == best))
    if len(tied) == 1:
        return PlanDecision.selected(tied[0][0], tied[0][1])

    middle = (len(tied) - 1) // 2
    row = int(np.sort(tied[:, 0])[middle])
    col = int(np.sort(tied[:, 1])[middle])
    if eligible[row, col]:
        return PlanDecision.selected(row, col)

    nearest = min(
        (abs(int(r) - row) + abs(int(c) - col), int(r), int(c)) for r, c in tied
    )
    return PlanDecision.selected(nearest[1], nearest[2])


def plan_step(
    octree: OccupancyOctree,
    bundle: PeacockBundle,
    pose: Pose,
    config: Optional[PlannerConfig] = None,
    query_depth: Optional[int] = None,
    envelope: Optional[SafetyEnvelope] = None,
) -> PlanResult:
    """Score the bundle at `pose` (yaw only) and pick the receding-horizon segment.

    With an `envelope` and `config.safety_gate` set, families whose first step
    breaks the envelope against the occupied voxels are blocked before scoring.
    """
    config = config or PlannerConfig()
    depth = octree.params.query_depth if query_depth is None else query_depth
    yaw = yaw_of(pose.rotation)

    started = time.perf_counter()
    samples = transform_bundle_samples(bundle, pose.position, yaw)
    excluded = None
    if envelope is not None and config.safety_gate:
        excluded = unsafe_families(samples, octree.export_occupied(), envelope)
    matrix = score_bundle(
        octree,
        samples,
        config.weights,
        depth,
        second_step_blocks=config.second_step_blocks,
        literal_reset=config.literal_reset,
        clearance_margin=config.clearance_margin,
        workers=config.workers,
        excluded=excluded,
    )
    decision = select_best(matrix)
    segment = None
    if decision.is_selected:
        segment = selected_world_segment(bundle, decision.row, decision.col, pose.position, yaw)
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    if decision.is_selected:
        logger.debug(
            f"Selected ({decision.row}, {decision.col}) score {matrix.max_score:g}, "
            f"{matrix.blocked_count} blocked, {elapsed_ms:.1f} ms"
        )
    else:
        logger.debug(f"All {matrix.blocked.size} families blocked ({elapsed_ms:.1f} ms)")
    return PlanResult(decision=decision, scores=matrix, segment=segment, elapsed_ms=elapsed_ms)
