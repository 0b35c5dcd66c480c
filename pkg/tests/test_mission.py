"""Tests for the exploration loop and its summary metrics."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import ndimage

from explorer.models.mission import MetricSample
from explorer.models.trajectory import BoundaryState
from explorer.models.vehicle import VehicleState
from explorer.models.world import AABB, World
from explorer.schemas.mission import MissionConfig, MissionMode, MissionOutcome, MissionSummary
from explorer.schemas.run import RunConfig
from explorer.schemas.sensor import CameraModel
from explorer.services.exports import write_metrics_csv
from explorer.services.mission import MissionRunner, compute_summary, run_mission
from explorer.services.sensor_world import clearance
from explorer.services.trajgen import solve_min_snap_segment
from explorer.services.worldgen import default_start, generate_world

FINISHED = (MissionOutcome.COMPLETED, MissionOutcome.STALLED)
DESK_SEED = 0


def sample(t: float, length: float, free: float, occupied: float = 0.0, cycle: int = 1):
    return MetricSample(
        t=t,
        position=(0.0, 0.0, 0.0),
        velocity=(0.0, 0.0, 0.0),
        yaw=0.0,
        path_length=length,
        free_volume=free,
        occupied_volume=occupied,
        cycle=cycle,
    )


def with_mission(config: RunConfig, **updates) -> RunConfig:
    return config.model_copy(update={"mission": config.mission.model_copy(update=updates)})


def open_room() -> World:
    return World(bounds=AABB(minimum=(0.0, 0.0, 0.0), maximum=(20.0, 20.0, 4.0)))


def desk_config() -> RunConfig:
    return RunConfig(mission=MissionConfig(seed=2))


def reachable_free_volume(world: World, start: np.ndarray, resolution: float = 0.5) -> float:
    """Volume of the free cells face-connected to the cell above `start`."""
    lo, hi = world.bounds.minimum, world.bounds.maximum
    axes = [np.arange(a, b, resolution) + resolution / 2 for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    free = np.ones(grid.shape[:3], dtype=bool)
    for box_min, box_max in zip(world.box_min, world.box_max):
        free &= ~np.all((grid >= box_min) & (grid <= box_max), axis=-1)
    labels, _ = ndimage.label(free)
    seed = np.floor((start + np.array([0.0, 0.0, 2.0]) - lo) / resolution).astype(int)
    component = labels[tuple(seed)]
    assert component > 0
    return float((labels == component).sum()) * resolution**3


class TestComputeSummary:
    """Tests for compute_summary."""

    def test_average_velocity(self) -> None:
        summary = compute_summary([sample(0.0, 0.0, 0.0), sample(140.24, 467.327, 27712.125)])
        assert summary.avg_velocity_mps == pytest.approx(3.332, abs=1e-3)
        assert summary.duration_s == 140.24
        assert summary.flight_length_m == 467.327

    def test_mapping_efficiency(self) -> None:
        summary = compute_summary([sample(140.24, 467.327, 27000.0, 712.125)])
        assert summary.mapped_volume_m3 == pytest.approx(27712.125)
        assert summary.mapping_efficiency_m3pm == pytest.approx(59.30, abs=1e-2)
        assert summary.avg_mapping_rate_m3ps == pytest.approx(27712.125 / 140.24)

    def test_empty_series(self) -> None:
        assert compute_summary([]) == MissionSummary()

    def test_zero_length_has_zero_ratios(self) -> None:
        summary = compute_summary([sample(0.0, 0.0, 10.0)])
        assert summary.avg_velocity_mps == 0.0
        assert summary.mapping_efficiency_m3pm == 0.0
        assert summary.avg_mapping_rate_m3ps == 0.0
        assert summary.mapped_volume_m3 == 10.0


class TestMissionRunner:
    """Short kinematic missions with known outcomes."""

    def test_sealed_room_stalls_without_flying(
        self, shell_world: World, shell_run_config: RunConfig
    ) -> None:
        runner = MissionRunner(shell_world, shell_run_config)
        metrics = runner.run()
        summary = metrics.summary
        assert summary.outcome is MissionOutcome.STALLED
        assert summary.cycles == shell_run_config.mission.stall_cycles
        assert summary.recoveries == shell_run_config.mission.stall_cycles - 1
        assert summary.flight_length_m == 0.0
        assert summary.occupied_volume_m3 > 0.0
        assert all(entry.row is None for entry in metrics.planner_log)
        assert [s.cycle for s in metrics.series] == [1, 2, 3, 4, 5]

    def test_takeoff_is_logged_before_time_zero(
        self, shell_world: World, shell_run_config: RunConfig
    ) -> None:
        metrics = MissionRunner(shell_world, shell_run_config).run()
        takeoff = [p for p in metrics.path if p.phase == "takeoff"]
        assert takeoff[0].t == pytest.approx(-2.0)
        assert takeoff[0].position == pytest.approx((2.5, 2.5, 0.0))
        assert takeoff[-1].position == pytest.approx((2.5, 2.5, 2.0), abs=1e-9)
        assert metrics.series[0].t == 0.0

    def test_goal_completes_and_lands(
        self, shell_world: World, shell_run_config: RunConfig
    ) -> None:
        config = with_mission(
            shell_run_config, goal_center=(2.5, 2.5, 2.0), goal_radius=0.5, land_on_finish=True
        )
        metrics = run_mission(shell_world, config)
        assert metrics.summary.outcome is MissionOutcome.COMPLETED
        assert metrics.summary.cycles == 1
        assert len(metrics.series) == 1
        assert metrics.planner_log == []
        landing = [p for p in metrics.path if p.phase == "landing"]
        assert landing
        assert landing[-1].position[2] == pytest.approx(0.0, abs=1e-9)

    def test_timeout(self, shell_world: World, shell_run_config: RunConfig) -> None:
        config = with_mission(shell_run_config, max_mission_time=0.1)
        summary = run_mission(shell_world, config).summary
        assert summary.outcome is MissionOutcome.TIMED_OUT
        assert summary.cycles == 2
        assert summary.recoveries == 1
        assert summary.duration_s == pytest.approx(0.5)

    def test_collision_ends_the_run(self) -> None:
        """A 2 m radius hovering 2 m above the floor touches it on the first tick."""
        config = RunConfig(
            mission=MissionConfig(
                mode=MissionMode.KINEMATIC, initial_yaw_deg=0.0, vehicle_radius=2.0
            ),
            camera=CameraModel(ray_cols=16, ray_rows=12),
        )
        metrics = run_mission(open_room(), config)
        assert metrics.summary.outcome is MissionOutcome.COLLISION_FAILURE
        assert not metrics.summary.outcome.is_success
        assert metrics.summary.min_clearance_m == pytest.approx(2.0)
        assert [s.cycle for s in metrics.series] == [1, 2]

    def test_seeded_runs_are_identical(self, tmp_path) -> None:
        world = generate_world("desk", 3)
        config = RunConfig(
            mission=MissionConfig(mode=MissionMode.KINEMATIC, max_mission_time=1.5, seed=11),
            camera=CameraModel(ray_cols=32, ray_rows=24),
        )
        first = write_metrics_csv(tmp_path / "a.csv", run_mission(world, config).series)
        second = write_metrics_csv(tmp_path / "b.csv", run_mission(world, config).series)
        assert first.read_bytes() == second.read_bytes()

    def test_random_initial_yaw_follows_seed(self, shell_world: World) -> None:
        config = RunConfig(mission=MissionConfig(mode=MissionMode.KINEMATIC, seed=4))
        a = MissionRunner(shell_world, config)
        b = MissionRunner(shell_world, config)
        assert a.yaw == b.yaw
        assert -np.pi <= a.yaw <= np.pi

    def test_wall_time_only_when_requested(
        self, shell_world: World, shell_run_config: RunConfig
    ) -> None:
        metrics = run_mission(shell_world, shell_run_config)
        assert all(s.plan_ms == 0.0 for s in metrics.series)
        timed = run_mission(shell_world, with_mission(shell_run_config, record_wall_time=True))
        assert any(s.plan_ms > 0.0 for s in timed.series)

    def test_emergency_stop_short_of_a_wall(self) -> None:
        """Cruising at 5 m/s toward a wall, the hold starts early enough to keep clear."""
        world = World(
            bounds=AABB(minimum=(0.0, 0.0, 0.0), maximum=(20.0, 20.0, 4.0)),
            boxes=(AABB(minimum=(4.6, 0.0, 0.0), maximum=(5.1, 20.0, 4.0)),),
        )
        config = RunConfig(mission=MissionConfig(initial_yaw_deg=0.0, seed=0))
        runner = MissionRunner(world, config)
        velocity = np.array([5.0, 0.0, 0.0])
        start = np.array([2.5, 10.0, 2.0])
        runner.state = VehicleState(p=start, v=velocity)
        segment = solve_min_snap_segment(
            BoundaryState(start, velocity), BoundaryState(start + 0.5 * velocity, velocity), 0.5
        )
        radius = config.mission.vehicle_radius

        assert runner._monitor(runner._segment_ticks(segment), abort=True) == "abort"
        assert clearance(world, runner.state.p) > config.mission.abort_clearance_factor * radius
        assert runner._recover() is None
        assert runner.min_clearance > radius

    def test_start_follows_world_origin(self) -> None:
        world = World(bounds=AABB(minimum=(-5.0, -5.0, 1.0), maximum=(5.0, 5.0, 5.0)))
        runner = MissionRunner(world, RunConfig(mission=MissionConfig(initial_yaw_deg=0.0)))
        np.testing.assert_array_equal(runner.start, default_start(world))
        np.testing.assert_allclose(runner.start, [-2.5, -2.5, 1.0])

    @pytest.mark.slow
    def test_open_room_is_mapped(self) -> None:
        world = open_room()
        config = RunConfig(mission=MissionConfig(mode=MissionMode.KINEMATIC, seed=1))
        runner = MissionRunner(world, config)
        summary = runner.run().summary
        assert summary.outcome in FINISHED
        assert runner.octree.known_volume_within(world.bounds) >= 0.95 * world.bounds.volume

    @pytest.mark.slow
    def test_full_maze_kinematic(self) -> None:
        world = generate_world("full", 0)
        config = RunConfig(mission=MissionConfig(mode=MissionMode.KINEMATIC, seed=0))
        summary = run_mission(world, config).summary
        assert summary.outcome is not MissionOutcome.COLLISION_FAILURE
        assert 10_000.0 <= summary.mapped_volume_m3 <= 60_000.0


# =============================================================================
# Dynamic desk maze
# =============================================================================


class TestDynamicDeskMaze:
    """Full-length dynamic missions through the seeded 20 x 20 x 4 m maze."""

    @pytest.mark.slow
    def test_explores_without_touching_walls(self) -> None:
        world = generate_world("desk", DESK_SEED)
        config = desk_config()
        runner = MissionRunner(world, config)
        metrics = runner.run()
        summary = metrics.summary
        assert summary.outcome in FINISHED
        assert summary.min_clearance_m > config.mission.vehicle_radius
        known = [s.known_volume for s in metrics.series]
        assert known == sorted(known)
        reachable = reachable_free_volume(world, runner.start)
        assert runner.octree.known_volume_within(world.bounds) >= 0.6 * reachable

    @pytest.mark.slow
    def test_seeded_runs_write_identical_metrics(self, tmp_path) -> None:
        world = generate_world("desk", DESK_SEED)
        first = write_metrics_csv(tmp_path / "a.csv", run_mission(world, desk_config()).series)
        second = write_metrics_csv(tmp_path / "b.csv", run_mission(world, desk_config()).series)
        assert first.read_bytes() == second.read_bytes()


class TestReachableFreeVolume:
    """Tests for the flood-fill reference volume."""

    def test_open_room_is_all_free(self) -> None:
        assert reachable_free_volume(open_room(), np.array([2.5, 2.5, 0.0])) == 1600.0

    def test_sealed_wall_splits_the_room(self) -> None:
        world = World(
            bounds=AABB(minimum=(0.0, 0.0, 0.0), maximum=(20.0, 20.0, 4.0)),
            boxes=(AABB(minimum=(10.0, 0.0, 0.0), maximum=(10.5, 20.0, 4.0)),),
        )
        assert reachable_free_volume(world, np.array([2.5, 2.5, 0.0])) == 800.0
