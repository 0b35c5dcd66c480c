"""Quadrotor rigid-body simulation and geometric tracking control on SE(3)."""
import math
from typing import Callable, Iterator, List, Optional

import numpy as np
from scipy.linalg import polar

from explorer.core.exceptions import (
    DegenerateHeading,
    DegenerateThrust,
    InvalidControlRate,
    InvalidTimestep,
)
from explorer.core.geometry import E3, hat, horizontal_heading, vee, yaw_matrix
from explorer.models.trajectory import Segment3D
from explorer.models.vehicle import ControlInput, FlatTarget, TrackResult, TrackTick, VehicleState
from explorer.schemas.vehicle import VehicleParams
from explorer.services.trajgen import evaluate

MAX_TIMESTEP = 0.01
MIN_CONTROL_RATE = 100.0
_DEGENERATE_NORM = 1e-9

TargetFn = Callable[[float], FlatTarget]


def geometric_control(
    state: VehicleState, target: FlatTarget, params: VehicleParams
) -> ControlInput:
    """Thrust and body moment driving `state` toward the flat target."""
    m, g = params.mass, params.gravity
    e_p = target.p_d - state.p
    e_v = target.v_d - state.v
    a_d = np.asarray(target.a_d, dtype=float)
    force = m * a_d + params.k_p * e_p + params.k_v * e_v + m * g * E3
    norm = float(np.linalg.norm(force))
    if norm < _DEGENERATE_NORM:
        raise DegenerateThrust("commanded thrust vector vanishes")
    b3d = force / norm
    thrust = max(float(force @ (state.R @ E3)), 0.0)

    heading = np.array([math.cos(target.yaw_d), math.sin(target.yaw_d), 0.0])
    b2d = np.cross(b3d, heading)
    b2d_norm = float(np.linalg.norm(b2d))
    if b2d_norm < _DEGENERATE_NORM:
        raise DegenerateHeading("thrust axis is parallel to the heading vector")
    b2d /= b2d_norm
    b1d = np.cross(b2d, b3d)
    R_d = np.column_stack([b1d, b2d, b3d])

    e_R = 0.5 * vee(R_d.T @ state.R - state.R.T @ R_d)
    e_omega = state.omega
    J = params.inertia_matrix
    feedback = -params.kr * e_R - params.komega * e_omega
    moment = J @ feedback + np.cross(state.omega, J @ state.omega)
    return ControlInput(f=thrust, M=moment)


def _derivative(
    x: np.ndarray, control: ControlInput, params: VehicleParams, J_inv: np.ndarray
) -> np.ndarray:
    v = x[3:6]
    R = x[6:15].reshape(3, 3)
    omega = x[15:18]
    J = params.inertia_matrix
    accel = (control.f / params.mass) * (R @ E3) - params.gravity * E3
    R_dot = R @ hat(omega)
    omega_dot = J_inv @ (control.M - np.cross(omega, J @ omega))
    return np.concatenate([v, accel, R_dot.ravel(), omega_dot])


def step_dynamics(
    state: VehicleState, control: ControlInput, params: VehicleParams, dt: float
) -> VehicleState:
    """One RK4 step of the rigid-body equations; R is projected back onto SO(3)."""
    if not (0.0 < dt <= MAX_TIMESTEP):
        raise InvalidTimestep(f"dt must be in (0, {MAX_TIMESTEP}], got {dt}")
    J_inv = np.linalg.inv(params.inertia_matrix)
    x = state.to_vector()
    k1 = _derivative(x, control, params, J_inv)
    k2 = _derivative(x + 0.5 * dt * k1, control, params, J_inv)
    k3 = _derivative(x + 0.5 * dt * k2, control, params, J_inv)
    k4 = _derivative(x + dt * k3, control, params, J_inv)
    x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    rotation, _ = polar(x_next[6:15].reshape(3, 3))
    x_next[6:15] = rotation.ravel()
    return VehicleState.from_vector(x_next)


def _check_rates(dt: float, control_rate: float) -> None:
    if not (0.0 < dt <= MAX_TIMESTEP):
        raise InvalidTimestep(f"dt must be in (0, {MAX_TIMESTEP}], got {dt}")
    if not control_rate >= MIN_CONTROL_RATE:
        raise InvalidControlRate(
            f"control rate must be >= {MIN_CONTROL_RATE} Hz, got {control_rate}"
        )


def _iter_closed_loop(
    state: VehicleState,
    target_at: TargetFn,
    duration: float,
    params: VehicleParams,
    dt: float,
    control_rate: float,
) -> Iterator[TrackTick]:
    """Zero-order-hold control at `control_rate`, integrated with steps of at most `dt`."""
    _check_rates(dt, control_rate)
    ticks = max(1, math.ceil(duration * control_rate - 1e-9))
    period = duration / ticks
    substeps = max(1, math.ceil(period / dt - 1e-9))
    h = period / substeps
    for k in range(ticks):
        t = k * period
        target = target_at(t)
        control = geometric_control(state, target, params)
        yield TrackTick(
            t=t,
            state=state,
            target=target,
            control=control,
            position_error=float(np.linalg.norm(target.p_d - state.p)),
        )
        for _ in range(substeps):
            state = step_dynamics(state, control, params, h)
    target = target_at(duration)
    yield TrackTick(
        t=duration,
        state=state,
        target=target,
        control=geometric_control(state, target, params),
        position_error=float(np.linalg.norm(target.p_d - state.p)),
    )


def segment_targets(segment: Segment3D, yaw: float) -> TargetFn:
    """Flat targets along a segment, yaw following the horizontal desired velocity."""
    held = [yaw]

    def target_at(t: float) -> FlatTarget:
        v_d = evaluate(segment, t, 1)
        held[0] = horizontal_heading(v_d, held[0])
        return FlatTarget(
            p_d=evaluate(segment, t, 0), v_d=v_d, a_d=evaluate(segment, t, 2), yaw_d=held[0]
        )

    return target_at


def iter_track(
    state: VehicleState,
    segment: Segment3D,
    yaw_d: float,
    params: VehicleParams,
    dt: float = 0.001,
    control_rate: float = 200.0,
) -> Iterator[TrackTick]:
    """Closed-loop rollout along `segment`, one tick per control update plus the final state.

    `yaw_d` is held until the desired horizontal speed reaches 0.1 m/s.
    """
    _check_rates(dt, control_rate)
    targets = segment_targets(segment, yaw_d)
    return _iter_closed_loop(state, targets, segment.duration, params, dt, control_rate)


def _collect(ticks: Iterator[TrackTick]) -> TrackResult:
    collected: List[TrackTick] = list(ticks)
    return TrackResult(
        ticks=collected,
        final_state=collected[-1].state,
        max_position_error=max(tick.position_error for tick in collected),
    )


def track(
    state: VehicleState,
    segment: Segment3D,
    yaw_d: float,
    params: VehicleParams,
    dt: float = 0.001,
    control_rate: float = 200.0,
) -> TrackResult:
    return _collect(iter_track(state, segment, yaw_d, params, dt, control_rate))


def iter_hold(
    state: VehicleState,
    position: np.ndarray,
    yaw: float,
    duration: float,
    params: VehicleParams,
    dt: float = 0.001,
    control_rate: float = 200.0,
) -> Iterator[TrackTick]:
    """Hover toward a fixed point while turning to `yaw`."""
    _check_rates(dt, control_rate)
    hold = FlatTarget(
        p_d=np.asarray(position, dtype=float), v_d=np.zeros(3), a_d=np.zeros(3), yaw_d=yaw
    )
    return _iter_closed_loop(state, lambda _t: hold, duration, params, dt, control_rate)


def hold_position(
    state: VehicleState,
    position: np.ndarray,
    yaw: float,
    duration: float,
    params: VehicleParams,
    dt: float = 0.001,
    control_rate: float = 200.0,
) -> TrackResult:
    return _collect(iter_hold(state, position, yaw, duration, params, dt, control_rate))


def stopping_time(params: VehicleParams) -> float:
    """Travel per unit speed (s) when the controller switches to holding the current point.

    Peak of the position error in p'' + kv p' + kp p = 0 started from unit
    velocity, plus the attitude loop lag komega / kr before the thrust tilts back.
    """
    sigma = 0.5 * params.kv
    discriminant = sigma**2 - params.kp
    if abs(discriminant) < 1e-12:
        overshoot = 1.0 / (sigma * math.e)
    elif discriminant < 0.0:
        damped = math.sqrt(-discriminant)
        t_peak = math.atan2(damped, sigma) / damped
        overshoot = math.exp(-sigma * t_peak) / math.sqrt(params.kp)
    else:
        root = math.sqrt(discriminant)
        fast, slow = sigma + root, sigma - root
        t_peak = math.log(fast / slow) / (fast - slow)
        overshoot = (math.exp(-slow * t_peak) - math.exp(-fast * t_peak)) / (fast - slow)
    return overshoot + params.komega / params.kr


def stopping_distance(speed: float, params: VehicleParams) -> float:
    """Distance covered after an emergency hold starting at `speed` (m/s)."""
    return abs(speed) * stopping_time(params)


def follow_exact(segment: Segment3D, t: float, yaw: float = 0.0) -> VehicleState:
    """Kinematic state on the segment: level attitude facing the horizontal velocity.

    `yaw` is used when the horizontal speed is below 0.1 m/s.
    """
    p = evaluate(segment, t, 0)
    v = evaluate(segment, t, 1)
    a = evaluate(segment, t, 2)
    heading = horizontal_heading(v, yaw)
    speed_sq = v[0] ** 2 + v[1] ** 2
    yaw_rate = (v[0] * a[1] - v[1] * a[0]) / speed_sq if speed_sq >= 0.01 else 0.0
    return VehicleState(p=p, v=v, R=yaw_matrix(heading), omega=np.array([0.0, 0.0, yaw_rate]))


def iter_follow(
    segment: Segment3D,
    yaw: float,
    control_rate: float = 200.0,
    hover_thrust: Optional[float] = None,
) -> Iterator[TrackTick]:
    """Kinematic counterpart of `iter_track`; position error is zero by construction."""
    if not control_rate >= MIN_CONTROL_RATE:
        raise InvalidControlRate(
            f"control rate must be >= {MIN_CONTROL_RATE} Hz, got {control_rate}"
        )
    ticks = max(1, math.ceil(segment.duration * control_rate - 1e-9))
    control = ControlInput(f=hover_thrust or 0.0, M=np.zeros(3))
    for k in range(ticks + 1):
        t = segment.duration * k / ticks
        state = follow_exact(segment, t, yaw)
        yaw = horizontal_heading(state.v, yaw)
        target = FlatTarget(p_d=state.p, v_d=state.v, a_d=evaluate(segment, t, 2), yaw_d=yaw)
        yield TrackTick(t=t, state=state, target=target, control=control, position_error=0.0)
