"""Tests for bundle scoring and best-path selection."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from explorer.core.geometry import yaw_matrix
from explorer.models.bundle import PeacockBundle, WorldSamples
from explorer.models.planning import CellState, PlanDecision, SafetyEnvelope, ScoreMatrix
from explorer.models.world import AABB, Pose
from explorer.schemas.planner import PlannerConfig, ScoreWeights
from explorer.schemas.voxmap import MapParams
from explorer.services.peacock import transform_bundle_samples
from explorer.services.planner import (
    fence_clearance,
    obstacle_clearance,
    plan_step,
    probe_offsets,
    score_bundle,
    score_family,
    select_best,
    unsafe_families,
)
from explorer.services.trajgen import evaluate
from explorer.services.voxmap import OccupancyOctree

WEIGHTS = ScoreWeights()


def reference_scores(octree: OccupancyOctree, samples: WorldSamples, depth: int):
    """Visit every sample of every family; any Occupied sample blocks the family."""
    scores = np.zeros((samples.rows, samples.cols))
    blocked = np.zeros((samples.rows, samples.cols), dtype=bool)
    for row, col in itertools.product(range(samples.rows), range(samples.cols)):
        first, second = samples.family(row, col)
        states = [octree.search(p, depth) for p in np.vstack([first, second])]
        if CellState.OCCUPIED in states:
            blocked[row, col] = True
            continue
        scores[row, col] = sum(
            WEIGHTS.a if s is CellState.FREE else WEIGHTS.b for s in states
        )
    return scores, blocked


def mark(octree: OccupancyOctree, points, delta: float) -> None:
    for point in points:
        octree.update_key(octree.coord_to_key(point), delta)


def matrix_with(cells, value: float = 5.0, shape=(9, 9)) -> ScoreMatrix:
    scores = np.zeros(shape)
    for row, col in cells:
        scores[row, col] = value
    return ScoreMatrix(scores=scores, blocked=np.zeros(shape, dtype=bool))


# =============================================================================
# Scoring
# =============================================================================


class TestScoreBundle:
    """Tests for score_bundle and score_family."""

    def test_unknown_map_scores_b_everywhere(
        self, octree: OccupancyOctree, default_bundle: PeacockBundle
    ) -> None:
        samples = transform_bundle_samples(default_bundle, np.zeros(3), 0.0)
        matrix = score_bundle(octree, samples, WEIGHTS, 15)
        assert matrix.shape == (9, 9)
        assert matrix.blocked_count == 0
        assert np.all(matrix.scores == WEIGHTS.b * default_bundle.samples_per_family)

    def test_free_map_scores_a_everywhere(
        self, octree: OccupancyOctree, default_bundle: PeacockBundle
    ) -> None:
        lo, hi = np.array([-1.0, -6.0, -4.0]), np.array([6.0, 6.0, 4.0])
        samples = transform_bundle_samples(default_bundle, np.zeros(3), 0.0)
        assert np.all(samples.first >= lo) and np.all(samples.first < hi)
        assert np.all(samples.second >= lo) and np.all(samples.second < hi)
        res = octree.resolution
        axes = [np.arange(a, b, res) + res / 2 for a, b in zip(lo, hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        mark(octree, grid, octree.params.miss_log_odds)

        matrix = score_bundle(octree, samples, WEIGHTS, 15)
        assert matrix.blocked_count == 0
        assert np.all(matrix.scores == WEIGHTS.a * default_bundle.samples_per_family)

    def test_one_occupied_voxel_blocks_its_family(
        self, octree: OccupancyOctree, default_bundle: PeacockBundle
    ) -> None:
        endpoint = default_bundle.first_step(0, 0).endpoint
        mark(octree, [endpoint], octree.params.hit_log_odds)
        samples = transform_bundle_samples(default_bundle, np.zeros(3), 0.0)

        matrix = score_bundle(octree, samples, WEIGHTS, 16)
        assert matrix.blocked[0, 0]
        assert matrix.scores[0, 0] == 0.0
        assert not matrix.blocked[4, 4]
        scores, blocked = reference_scores(octree, samples, 16)
        np.testing.assert_array_equal(matrix.blocked, blocked)
        np.testing.assert_array_equal(matrix.scores, scores)

    def test_matches_reference_on_random_maps(self, small_bundle: PeacockBundle) -> None:
        rng = np.random.default_rng(77)
        for _ in range(50):
            octree = OccupancyOctree(MapParams())
            mark(octree, rng.uniform(-1.0, 5.0, size=(200, 3)), octree.params.miss_log_odds)
            mark(octree, rng.uniform(-1.0, 5.0, size=(5, 3)), octree.params.hit_log_odds)
            position = rng.uniform(-0.5, 0.5, size=3)
            samples = transform_bundle_samples(small_bundle, position, rng.uniform(-0.5, 0.5))
            depth = int(rng.choice([15, 16]))
            matrix = score_bundle(octree, samples, WEIGHTS, depth)
            scores, blocked = reference_scores(octree, samples, depth)
            np.testing.assert_array_equal(matrix.blocked, blocked)
            np.testing.assert_array_equal(matrix.scores, scores)

    def test_parallel_matches_sequential(self, default_bundle: PeacockBundle) -> None:
        rng = np.random.default_rng(5)
        octree = OccupancyOctree(MapParams())
        mark(octree, rng.uniform(-2.0, 6.0, size=(400, 3)), octree.params.miss_log_odds)
        mark(octree, rng.uniform(-2.0, 6.0, size=(20, 3)), octree.params.hit_log_odds)
        samples = transform_bundle_samples(default_bundle, np.zeros(3), 0.2)
        sequential = score_bundle(octree, samples, WEIGHTS, 15, clearance_margin=0.5)
        parallel = score_bundle(octree, samples, WEIGHTS, 15, clearance_margin=0.5, workers=4)
        np.testing.assert_array_equal(parallel.scores, sequential.scores)
        np.testing.assert_array_equal(parallel.blocked, sequential.blocked)

    def test_probes_block_near_misses(
        self, octree: OccupancyOctree, default_bundle: PeacockBundle
    ) -> None:
        """An occupied voxel beside the straight-ahead path blocks it only with probes."""
        mark(octree, [(1.25, 0.75, 0.25)], octree.params.hit_log_odds)
        samples = transform_bundle_samples(default_bundle, np.zeros(3), 0.0)
        plain = score_bundle(octree, samples, WEIGHTS, 16)
        probed = score_bundle(octree, samples, WEIGHTS, 16, clearance_margin=0.5)
        assert not plain.blocked[4, 4]
        assert probed.blocked[4, 4]

    def test_probe_offsets(self) -> None:
        offsets = probe_offsets(0.5, 1.0)
        assert offsets.shape == (12, 3)
        assert set(np.abs(offsets).sum(axis=1)) == {0.5, 1.0}
        assert probe_offsets(0.5, 0.2).shape == (0, 3)

    def test_literal_reset_keeps_accumulating(self, octree: OccupancyOctree) -> None:
        occupied = np.array([0.25, 0.25, 0.25])
        mark(octree, [occupied], octree.params.hit_log_odds)
        unknown = np.array([[10.0, 10.0, 10.0], [12.0, 10.0, 10.0], [14.0, 10.0, 10.0]])
        first = np.vstack([unknown[0], occupied, unknown[1]])
        second = unknown[2:]

        assert score_family(octree, first, second, WEIGHTS, 16) == (0.0, True)
        score, blocked = score_family(octree, first, second, WEIGHTS, 16, literal_reset=True)
        assert (score, blocked) == (2 * WEIGHTS.b, False)

    def test_second_step_policy(self, octree: OccupancyOctree) -> None:
        occupied = np.array([0.25, 0.25, 0.25])
        mark(octree, [occupied], octree.params.hit_log_odds)
        first = np.array([[10.0, 10.0, 10.0], [12.0, 10.0, 10.0]])
        second = np.vstack([occupied, [14.0, 10.0, 10.0]])

        assert score_family(octree, first, second, WEIGHTS, 16) == (0.0, True)
        lenient = score_family(octree, first, second, WEIGHTS, 16, second_step_blocks=False)
        assert lenient == (3 * WEIGHTS.b, False)


# =============================================================================
# Selection
# =============================================================================


class TestSelectBest:
    """Tests for select_best."""

    def test_full_tie_selects_center(self) -> None:
        assert select_best(matrix_with(itertools.product(range(9), range(9)))) == PlanDecision(4, 4)

    def test_unique_maximum(self) -> None:
        matrix = matrix_with([(2, 7)], value=9.0)
        matrix.scores[0, 0] = 3.0
        assert select_best(matrix) == PlanDecision.selected(2, 7)

    def test_tie_takes_median_indices(self) -> None:
        matrix = matrix_with([(1, 0), (3, 2), (8, 6)])
        assert select_best(matrix) == PlanDecision.selected(3, 2)

    def test_even_tie_takes_lower_median(self) -> None:
        matrix = matrix_with([(2, 2), (2, 5), (6, 2), (6, 5)])
        assert select_best(matrix) == PlanDecision.selected(2, 2)

    def test_ineligible_median_falls_back_to_nearest_tie(self) -> None:
        """Median cell (1, 1) is not tied; (1, 2) and (2, 1) are one step away, lower row wins."""
        matrix = matrix_with([(0, 0), (1, 2), (2, 1)])
        assert select_best(matrix) == PlanDecision.selected(1, 2)

    def test_all_blocked(self) -> None:
        shape = (9, 9)
        matrix = ScoreMatrix(scores=np.zeros(shape), blocked=np.ones(shape, dtype=bool))
        decision = select_best(matrix)
        assert decision == PlanDecision.all_blocked()
        assert not decision.is_selected

    def test_all_zero_scores_count_as_blocked(self) -> None:
        assert select_best(matrix_with([])) == PlanDecision.all_blocked()

    def test_blocked_families_must_score_zero(self) -> None:
        blocked = np.zeros((2, 2), dtype=bool)
        blocked[0, 1] = True
        with pytest.raises(ValueError, match="blocked families must score 0"):
            ScoreMatrix(scores=np.ones((2, 2)), blocked=blocked)


# =============================================================================
# Plan step
# =============================================================================


class TestPlanStep:
    """Tests for plan_step."""

    def test_unknown_map_flies_straight_ahead(
        self, octree: OccupancyOctree, default_bundle: PeacockBundle
    ) -> None:
        position = np.array([3.0, -2.0, 1.5])
        yaw = 0.8
        result = plan_step(octree, default_bundle, Pose(position, yaw_matrix(yaw)))
        assert result.decision == PlanDecision.selected(4, 4)
        assert result.elapsed_ms >= 0.0
        expected_end = position + 2.5 * np.array([np.cos(yaw), np.sin(yaw), 0.0])
        np.testing.assert_allclose(evaluate(result.segment, 0.0, 0), position, atol=1e-9)
        np.testing.assert_allclose(evaluate(result.segment, 0.5, 0), expected_end, atol=1e-9)

    def test_enclosing_shell_blocks_everything(
        self, octree: OccupancyOctree, default_bundle: PeacockBundle
    ) -> None:
        res = octree.resolution
        shell = [
            ((i + 0.5) * res, (j + 0.5) * res, (k + 0.5) * res)
            for i, j, k in itertools.product(range(-3, 4), repeat=3)
            if max(abs(i), abs(j), abs(k)) == 3
        ]
        mark(octree, shell, octree.params.hit_log_odds)
        result = plan_step(octree, default_bundle, Pose(np.zeros(3)), PlannerConfig())
        assert not result.decision.is_selected
        assert result.segment is None
        assert result.scores.blocked_count == 81

    def test_config_weights_flow_through(
        self, octree: OccupancyOctree, small_bundle: PeacockBundle
    ) -> None:
        config = PlannerConfig(a=2.0, b=7.0, clearance_margin=0.0)
        result = plan_step(octree, small_bundle, Pose(np.zeros(3)), config)
        assert result.scores.max_score == 7.0 * small_bundle.samples_per_family


# =============================================================================
# Safety envelope
# =============================================================================


def wall_at(octree: OccupancyOctree, x: float) -> None:
    """Occupied voxels across the plane through `x`, 12 m wide and 6 m tall."""
    res = octree.resolution
    points = [
        (x, (j + 0.5) * res, (k + 0.5) * res)
        for j, k in itertools.product(range(-12, 12), range(-6, 6))
    ]
    mark(octree, points, octree.params.hit_log_odds)


class TestSafetyGate:
    """Tests for obstacle_clearance, fence_clearance and unsafe_families."""

    def test_box_distance_to_voxels(self, octree: OccupancyOctree) -> None:
        mark(octree, [(3.25, 0.25, 0.25)], octree.params.hit_log_odds)
        voxels = octree.export_occupied()
        points = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.25], [3.25, 0.25, 0.25]])
        gaps = obstacle_clearance(points, voxels, 5.0)
        np.testing.assert_allclose(gaps, [3.0, np.sqrt(4.25), 0.0], atol=1e-12)
        np.testing.assert_allclose(obstacle_clearance(points, voxels, 2.0), [2.0, 2.0, 0.0])

    def test_empty_map_is_clear_to_reach(self) -> None:
        np.testing.assert_array_equal(obstacle_clearance(np.zeros((4, 3)), [], 1.5), 1.5)

    def test_fence_clearance(self) -> None:
        fence = AABB(minimum=(0.0, 0.0, 0.0), maximum=(10.0, 10.0, 4.0))
        points = np.array([[1.0, 5.0, 2.0], [5.0, 5.0, 3.5], [-1.0, 5.0, 2.0]])
        np.testing.assert_allclose(fence_clearance(points, fence), [1.0, 0.5, -1.0])

    def test_stopping_path_into_a_wall(
        self, octree: OccupancyOctree, default_bundle: PeacockBundle
    ) -> None:
        """The straight step ends 1 m short of the wall but cannot stop from 5 m/s in time."""
        wall_at(octree, 3.75)
        samples = transform_bundle_samples(default_bundle, np.zeros(3), 0.0)
        voxels = octree.export_occupied()
        coasting = SafetyEnvelope(pass_clearance=0.95, stop_clearance=0.7)
        assert not unsafe_families(samples, voxels, coasting)[4, 4]
        braking = SafetyEnvelope(pass_clearance=0.95, stop_clearance=0.7, stop_time=0.1447)
        unsafe = unsafe_families(samples, voxels, braking)
        assert unsafe[4, 4]
        assert not unsafe[4, 8] and not unsafe[4, 0]

    def test_fence_blocks_steep_pitches(
        self, octree: OccupancyOctree, default_bundle: PeacockBundle
    ) -> None:
        """From 2 m up in a 4 m room, pitches of 30 degrees or more leave the 0.95 m band."""
        fence = AABB(minimum=(-10.0, -10.0, 0.0), maximum=(10.0, 10.0, 4.0))
        envelope = SafetyEnvelope(pass_clearance=0.95, stop_clearance=0.7, fence=fence)
        pose = Pose(np.array([0.0, 0.0, 2.0]))
        result = plan_step(octree, default_bundle, pose, PlannerConfig(), envelope=envelope)
        blocked_rows = result.scores.blocked.all(axis=1)
        assert list(np.flatnonzero(blocked_rows)) == [0, 1, 7, 8]
        assert not result.scores.blocked[2:7].any()
        assert result.decision == PlanDecision.selected(4, 4)

        ungated = plan_step(
            octree, default_bundle, pose, PlannerConfig(safety_gate=False), envelope=envelope
        )
        assert ungated.scores.blocked_count == 0
