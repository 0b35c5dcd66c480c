"""Exploration loop: take off, then sense, map, plan and track until done.

Every cycle renders one depth image from a yaw-only gimbal pose, inserts the
point cloud into the octree, scores the peacock bundle and flies the chosen
first step for one period. When every family is blocked the vehicle hovers and
turns in place instead.
"""
import math
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from loguru import logger

from explorer.core.config import ensure_valid
from explorer.core.geometry import wrap_angle, yaw_matrix
from explorer.models.bundle import PeacockBundle
from explorer.models.mission import MetricSample, MissionMetrics, PathPoint, PlannerLogEntry
from explorer.models.planning import PlanResult, SafetyEnvelope
from explorer.models.trajectory import BoundaryState
from explorer.models.vehicle import TrackTick, VehicleState
from explorer.models.world import Pose, World
from explorer.schemas.mission import MissionMode, MissionOutcome, MissionSummary
from explorer.schemas.run import RunConfig
from explorer.services.peacock import log_bundle, precompute_bundle
from explorer.services.planner import STOP_FRACTIONS, plan_step
from explorer.services.sensor_world import clearance, depth_to_points, render_depth
from explorer.services.trajgen import solve_min_snap_segment
from explorer.services.vehicle import iter_follow, iter_hold, iter_track, stopping_time
from explorer.services.voxmap import OccupancyOctree
from explorer.services.worldgen import default_start

# Surface points are pushed this far along their ray so they land in the voxel behind the surface.
SURFACE_NUDGE = 1e-6


def _safe_ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0 else 0.0


def compute_summary(series: Sequence[MetricSample]) -> MissionSummary:
    """Duration, flight length and mapped volume from the last sample, plus their ratios."""
    if not series:
        return MissionSummary()
    last = series[-1]
    duration = last.t
    length = last.path_length
    mapped = last.known_volume
    return MissionSummary(
        duration_s=duration,
        flight_length_m=length,
        avg_velocity_mps=_safe_ratio(length, duration),
        free_volume_m3=last.free_volume,
        occupied_volume_m3=last.occupied_volume,
        mapped_volume_m3=mapped,
        avg_mapping_rate_m3ps=_safe_ratio(mapped, duration),
        mapping_efficiency_m3pm=_safe_ratio(mapped, length),
        cycles=last.cycle,
    )


class MissionRunner:
    """Owns all mutable mission state for one run."""

    def __init__(self, world: World, config: RunConfig):
        self.world = world
        self.config = ensure_valid(config)
        self.mission = self.config.mission
        self.octree = OccupancyOctree.for_world(self.config.map, world)
        self.cruise_bundle = precompute_bundle(self.config.bundle)
        self.launch_bundle = precompute_bundle(self.config.bundle, start_speed=0.0)
        log_bundle(self.cruise_bundle)
        self.rng = np.random.default_rng(self.mission.seed)

        if self.mission.start_xy is not None:
            x, y = self.mission.start_xy
            self.start = np.array([x, y, float(world.bounds.minimum[2])])
        else:
            self.start = default_start(world)
        if self.mission.initial_yaw_deg is not None:
            self.yaw = wrap_angle(math.radians(self.mission.initial_yaw_deg))
        else:
            self.yaw = float(self.rng.uniform(-math.pi, math.pi))

        self.state = VehicleState(p=self.start, R=yaw_matrix(self.yaw))
        self.stop_time = 0.0
        tracking = 0.0
        if self.mission.mode is MissionMode.DYNAMIC:
            self.stop_time = stopping_time(self.config.vehicle)
            tracking = self.mission.tracking_margin
        radius = self.mission.vehicle_radius
        self.envelope = SafetyEnvelope(
            pass_clearance=self.mission.abort_clearance_factor * radius + tracking,
            stop_clearance=radius + self.mission.abort_margin + tracking,
            stop_time=self.stop_time,
            fence=world.bounds,
        )

        self.metrics = MissionMetrics()
        self.t = 0.0
        self.path_length = 0.0
        self.min_clearance = math.inf
        self.recoveries = 0

    # Flight primitives

    def _segment_ticks(self, segment) -> Iterator[TrackTick]:
        if self.mission.mode is MissionMode.KINEMATIC:
            return iter_follow(segment, self.yaw, self.mission.control_rate)
        return iter_track(
            self.state,
            segment,
            self.yaw,
            self.config.vehicle,
            self.mission.sim_dt,
            self.mission.control_rate,
        )

    def _hold_ticks(self, yaw: float, duration: float) -> Iterable[TrackTick]:
        if self.mission.mode is MissionMode.KINEMATIC:
            return ()
        return iter_hold(
            self.state,
            self.state.p,
            yaw,
            duration,
            self.config.vehicle,
            self.mission.sim_dt,
            self.mission.control_rate,
        )

    def _rest_segment(self, target: np.ndarray, duration: float):
        start = BoundaryState(self.state.p, self.state.v, np.zeros(3), np.zeros(3))
        end = BoundaryState(target, np.zeros(3), np.zeros(3), np.zeros(3))
        return solve_min_snap_segment(start, end, duration)

    def _fly_unmonitored(self, segment, phase: str, t0: float) -> None:
        for tick in self._segment_ticks(segment):
            self.state = tick.state
            self.metrics.path.append(PathPoint(t0 + tick.t, tuple(map(float, tick.state.p)), phase))

    def takeoff(self) -> None:
        target = self.start + np.array([0.0, 0.0, self.mission.takeoff_altitude])
        duration = self.mission.takeoff_duration
        logger.info(f"Taking off to {self.mission.takeoff_altitude:g} m over {duration:g} s")
        self._fly_unmonitored(self._rest_segment(target, duration), "takeoff", -duration)
        if self.mission.mode is MissionMode.KINEMATIC:
            self.state = VehicleState(p=target, R=yaw_matrix(self.yaw))

    def land(self) -> None:
        floor = float(self.world.bounds.minimum[2])
        target = np.array([self.state.p[0], self.state.p[1], floor])
        duration = self.mission.takeoff_duration
        logger.info(f"Landing at ({target[0]:.2f}, {target[1]:.2f})")
        self._fly_unmonitored(self._rest_segment(target, duration), "landing", self.t)

    def _stopping_reach(self, state: VehicleState) -> float:
        """Smallest clearance along the straight path an emergency hold from `state` covers."""
        gap = clearance(self.world, state.p)
        if self.stop_time <= 0.0:
            return gap
        travel = self.stop_time * state.v
        return min(gap, *(clearance(self.world, state.p + f * travel) for f in STOP_FRACTIONS))

    def _monitor(self, ticks: Iterable[TrackTick], abort: bool) -> Optional[str]:
        """Advance through ticks, accumulating path and clearance.

        With `abort` set, a segment is cut short when the clearance falls
        below factor * radius, or when stopping now would end within
        `abort_margin` of the radius, while either is still shrinking.
        Returns "collision", "abort" or None when the ticks ran out.
        """
        radius = self.mission.vehicle_radius
        abort_below = self.mission.abort_clearance_factor * radius
        stop_floor = radius + self.mission.abort_margin
        t0 = self.t
        previous_gap = clearance(self.world, self.state.p)
        previous_reach = self._stopping_reach(self.state)
        for tick in ticks:
            if tick.t > 0.0:
                self.path_length += float(np.linalg.norm(tick.state.p - self.state.p))
            self.state = tick.state
            self.yaw = tick.target.yaw_d
            self.t = t0 + tick.t
            self.metrics.path.append(PathPoint(self.t, tuple(map(float, tick.state.p))))
            gap = clearance(self.world, tick.state.p)
            self.min_clearance = min(self.min_clearance, gap)
            if gap <= radius:
                logger.warning(f"Collision at t={self.t:.3f}s: clearance {gap:.3f} m")
                return "collision"
            if abort:
                reach = self._stopping_reach(tick.state)
                closing = gap < abort_below and gap < previous_gap
                overrun = reach < stop_floor and reach < previous_reach
                if closing or overrun:
                    speed = float(np.linalg.norm(tick.state.v))
                    logger.warning(
                        f"Aborting segment at t={self.t:.3f}s: clearance {gap:.3f} m, "
                        f"{reach:.3f} m after stopping from {speed:.2f} m/s"
                    )
                    return "abort"
                previous_reach = reach
            previous_gap = gap
        return None

    def _recover(self) -> Optional[str]:
        """Hover in place and turn by the recovery yaw step for one planning period."""
        self.recoveries += 1
        new_yaw = wrap_angle(self.yaw + math.radians(self.mission.recovery_yaw_deg))
        period = self.config.bundle.period
        logger.warning(f"Recovery {self.recoveries}: yawing to {math.degrees(new_yaw):.1f} deg")
        if self.mission.mode is MissionMode.KINEMATIC:
            self.state = VehicleState(p=self.state.p, R=yaw_matrix(new_yaw))
            self.yaw = new_yaw
            self.t += period
            self.metrics.path.append(PathPoint(self.t, tuple(map(float, self.state.p))))
            gap = clearance(self.world, self.state.p)
            self.min_clearance = min(self.min_clearance, gap)
            if gap <= self.mission.vehicle_radius:
                logger.warning(f"Collision at t={self.t:.3f}s: clearance {gap:.3f} m")
                return "collision"
            return None
        outcome = self._monitor(self._hold_ticks(new_yaw, period), abort=False)
        self.yaw = new_yaw
        return outcome

    # Cycle pieces

    def _scan(self) -> Pose:
        pose = Pose(position=self.state.p, rotation=yaw_matrix(self.yaw))
        image = render_depth(self.world, pose, self.config.camera)
        points = depth_to_points(image)
        if len(points):
            rays = points - pose.position
            points = points + SURFACE_NUDGE * rays / np.linalg.norm(rays, axis=1, keepdims=True)
        self.octree.insert_scan(pose.position, points, self.config.camera.max_range)
        return pose

    def _bundle_for_state(self) -> PeacockBundle:
        speed = float(np.linalg.norm(self.state.v))
        if speed < self.config.bundle.speed / 2.0:
            return self.launch_bundle
        return self.cruise_bundle

    def _goal_reached(self) -> bool:
        center = self.mission.goal_center
        if center is None or self.mission.goal_radius is None:
            return False
        return float(np.linalg.norm(self.state.p - np.asarray(center))) <= self.mission.goal_radius

    def _record(self, cycle: int, plan: Optional[PlanResult]) -> None:
        free, occupied = self.octree.mapped_volumes()
        score = plan.scores.max_score if plan else 0.0
        blocked = plan.scores.blocked_count if plan else 0
        plan_ms = plan.elapsed_ms if plan and self.mission.record_wall_time else 0.0
        self.metrics.series.append(
            MetricSample(
                t=self.t,
                position=tuple(map(float, self.state.p)),
                velocity=tuple(map(float, self.state.v)),
                yaw=self.yaw,
                path_length=self.path_length,
                free_volume=free,
                occupied_volume=occupied,
                cycle=cycle,
                score=score,
                blocked_count=blocked,
                plan_ms=plan_ms,
            )
        )
        if plan is not None:
            self.metrics.planner_log.append(
                PlannerLogEntry(
                    cycle=cycle,
                    row=plan.decision.row,
                    col=plan.decision.col,
                    max_score=score,
                    blocked_count=blocked,
                    wall_ms=plan.elapsed_ms,
                )
            )

    def run(self) -> MissionMetrics:
        logger.info(
            f"Mission start at ({self.start[0]:.2f}, {self.start[1]:.2f}), "
            f"yaw {math.degrees(self.yaw):.1f} deg, mode {self.mission.mode.value}"
        )
        self.takeoff()
        self.min_clearance = clearance(self.world, self.state.p)
        weight_free = self.config.planner.a
        stall = 0
        cycle = 0
        outcome: Optional[MissionOutcome] = None

        while outcome is None:
            cycle += 1
            pose = self._scan()

            if self._goal_reached():
                outcome = MissionOutcome.COMPLETED
            elif self.t >= self.mission.max_mission_time:
                outcome = MissionOutcome.TIMED_OUT
            if outcome is not None:
                self._record(cycle, None)
                break

            bundle = self._bundle_for_state()
            plan = plan_step(self.octree, bundle, pose, self.config.planner, envelope=self.envelope)
            self._record(cycle, plan)

            nothing_unknown = plan.scores.max_score <= weight_free * bundle.samples_per_family
            stall = stall + 1 if (not plan.decision.is_selected or nothing_unknown) else 0
            if stall >= self.mission.stall_cycles:
                outcome = MissionOutcome.STALLED
                break

            if plan.decision.is_selected and plan.segment is not None:
                event = self._monitor(self._segment_ticks(plan.segment), abort=True)
                if event == "abort":
                    if self.mission.mode is MissionMode.KINEMATIC:
                        self.state = VehicleState(p=self.state.p, R=yaw_matrix(self.yaw))
                    event = self._recover()
            else:
                event = self._recover()
            if event == "collision":
                outcome = MissionOutcome.COLLISION_FAILURE

        if outcome is MissionOutcome.COLLISION_FAILURE:
            self._record(cycle + 1, None)

        summary = compute_summary(self.metrics.series).model_copy(
            update={
                "outcome": outcome,
                "cycles": cycle,
                "recoveries": self.recoveries,
                "min_clearance_m": None if math.isinf(self.min_clearance) else self.min_clearance,
            }
        )
        self.metrics.summary = summary
        logger.info(
            f"Mission {outcome.value} after {cycle} cycles: {summary.duration_s:.2f} s, "
            f"{summary.flight_length_m:.2f} m flown, {summary.mapped_volume_m3:.3f} m^3 mapped"
        )
        if self.mission.land_on_finish and outcome.is_success:
            self.land()
        return self.metrics


def run_mission(world: World, config: Optional[RunConfig] = None) -> MissionMetrics:
    """Run one exploration mission; failures are reported as outcomes."""
    return MissionRunner(world, config or RunConfig()).run()
