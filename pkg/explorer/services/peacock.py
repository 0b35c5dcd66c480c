"""Peacock bundle: a yaw x pitch fan of first steps, each with second-step branches.

Everything is solved once in a canonical frame (start at the origin, heading
+X, gravity-aligned) and rigidly moved to the vehicle pose every cycle.
"""
import math
from typing import Iterator, Optional, Tuple

import numpy as np
from loguru import logger
from numpy.polynomial import polynomial as P

from explorer.core.config import ensure_valid
from explorer.core.exceptions import InvalidParams
from explorer.core.geometry import symmetric_grid, yaw_matrix
from explorer.models.bundle import FirstStep, PeacockBundle, SecondStep, WorldSamples
from explorer.models.trajectory import Segment3D
from explorer.schemas.bundle import BundleParams
from explorer.services.trajgen import solve_min_snap_coefficients, transform_segment

_DENSE_POINTS = 257
_SPEED_MARGIN = 1.05

BundleCsvRow = Tuple[int, int, int, int, float, float, float, float]


def _evaluate_many(coefficients: np.ndarray, times: np.ndarray) -> np.ndarray:
    """(..., 3, 8) coefficients at (n,) times -> (..., n, 3) points."""
    powers = times[:, None] ** np.arange(coefficients.shape[-1])
    return np.einsum("...ak,nk->...na", coefficients, powers)


def _uniform_times(coefficients: np.ndarray, duration: float, spacing: float) -> np.ndarray:
    """Common sample times so that consecutive samples are <= spacing apart."""
    dense = np.linspace(0.0, duration, _DENSE_POINTS)
    velocity = P.polyder(coefficients, axis=-1)
    speed = np.linalg.norm(_evaluate_many(velocity, dense), axis=-1)
    reach = float(speed.max()) * _SPEED_MARGIN * duration
    intervals = max(1, math.ceil(reach / spacing))
    return np.linspace(0.0, duration, intervals + 1)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def precompute_bundle(params: BundleParams, start_speed: Optional[float] = None) -> PeacockBundle:
    """Solve every first and second step of the bundle in the canonical frame.

    `start_speed` is the speed along +X at the start of every first step; it
    defaults to the cruise speed. A zero start speed gives the launch bundle
    used when the vehicle is at rest.

    First steps last 2 * step / (start_speed + speed), which is the period for
    cruise bundles. Launch first steps are straight lines whose speed rises
    monotonically to the cruise speed.
    """
    params = ensure_valid(params)
    speed, period = params.speed, params.period
    if start_speed is None:
        start_speed = speed
    if not (math.isfinite(start_speed) and start_speed >= 0):
        raise InvalidParams(f"start speed must be finite and >= 0, got {start_speed}")
    step = params.step_length
    first_duration = 2.0 * step / (start_speed + speed)

    pitches = symmetric_grid(params.pitch_range, params.rows)
    yaws = symmetric_grid(params.yaw_range, params.cols)
    offsets = symmetric_grid(params.branch_yaw_range, params.branches)
    theta, psi = np.meshgrid(pitches, yaws, indexing="ij")

    direction = np.stack(
        [np.cos(psi) * np.cos(theta), np.sin(psi) * np.cos(theta), np.sin(theta)], axis=-1
    )
    endpoints = step * direction

    first_start = np.zeros(theta.shape + (4, 3))
    first_start[..., 1, 0] = start_speed
    first_end = np.zeros_like(first_start)
    first_end[..., 0, :] = endpoints
    first_end[..., 1, :] = speed * direction
    first_coefficients = solve_min_snap_coefficients(first_start, first_end, first_duration)

    heading = psi[..., None] + offsets
    branch_direction = np.stack([np.cos(heading), np.sin(heading), np.zeros_like(heading)], axis=-1)
    level_direction = np.stack([np.cos(psi), np.sin(psi), np.zeros_like(psi)], axis=-1)

    second_start = np.zeros(heading.shape + (4, 3))
    second_start[..., 0, :] = endpoints[:, :, None, :]
    second_start[..., 1, :] = speed * level_direction[:, :, None, :]
    second_end = np.zeros_like(second_start)
    second_end[..., 0, :] = endpoints[:, :, None, :] + step * branch_direction
    second_end[..., 1, :] = speed * branch_direction
    second_coefficients = solve_min_snap_coefficients(second_start, second_end, period)

    spacing = params.sample_spacing
    first_times = _frozen(_uniform_times(first_coefficients, first_duration, spacing))
    second_times = _frozen(_uniform_times(second_coefficients, period, spacing))
    first_samples = _frozen(_evaluate_many(first_coefficients, first_times))
    first_velocities = _frozen(
        _evaluate_many(P.polyder(first_coefficients, axis=-1), first_times)
    )
    second_samples = _frozen(_evaluate_many(second_coefficients, second_times))

    grid = []
    for row in range(params.rows):
        cells = []
        for col in range(params.cols):
            branches = tuple(
                SecondStep(
                    branch=b,
                    yaw_offset=float(offsets[b]),
                    segment=Segment3D(second_coefficients[row, col, b], period),
                    samples=second_samples[row, col, b],
                    sample_times=second_times,
                )
                for b in range(params.branches)
            )
            cells.append(
                FirstStep(
                    row=row,
                    col=col,
                    yaw=float(psi[row, col]),
                    pitch=float(theta[row, col]),
                    segment=Segment3D(first_coefficients[row, col], first_duration),
                    endpoint=_frozen(endpoints[row, col].copy()),
                    samples=first_samples[row, col],
                    sample_times=first_times,
                    second_steps=branches,
                )
            )
        grid.append(tuple(cells))

    return PeacockBundle(
        params=params,
        start_speed=float(start_speed),
        pitches=_frozen(pitches),
        yaws=_frozen(yaws),
        branch_offsets=_frozen(offsets),
        grid=tuple(grid),
        first_samples=first_samples,
        first_times=first_times,
        first_velocities=first_velocities,
        second_samples=second_samples,
        second_times=second_times,
    )


def transform_bundle_samples(
    bundle: PeacockBundle, position: np.ndarray, yaw: float
) -> WorldSamples:
    """Rotate every cached sample about world Z by `yaw`, then translate.

    First-step velocities are rotated only.
    """
    rotation_t = yaw_matrix(yaw).T
    offset = np.asarray(position, dtype=float).reshape(3)
    return WorldSamples(
        first=bundle.first_samples @ rotation_t + offset,
        second=bundle.second_samples @ rotation_t + offset,
        first_velocities=bundle.first_velocities @ rotation_t,
    )


def selected_world_segment(
    bundle: PeacockBundle, row: int, col: int, position: np.ndarray, yaw: float
) -> Segment3D:
    step = bundle.first_step(row, col)
    return transform_segment(step.segment, yaw_matrix(yaw), np.asarray(position, dtype=float))


def bundle_sample_rows(bundle: PeacockBundle) -> Iterator[BundleCsvRow]:
    """(step, row, col, branch, t, x, y, z) rows; branch is -1 on first steps."""
    for cells in bundle.grid:
        for first in cells:
            for t, point in zip(first.sample_times, first.samples):
                yield (1, first.row, first.col, -1, float(t), *map(float, point))
            for second in first.second_steps:
                for t, point in zip(second.sample_times, second.samples):
                    yield (2, first.row, first.col, second.branch, float(t), *map(float, point))


def log_bundle(bundle: PeacockBundle) -> None:
    logger.debug(
        f"Bundle {bundle.rows}x{bundle.cols}x{bundle.params.branches}: "
        f"{bundle.first_step_count} first steps, {bundle.second_step_count} second steps, "
        f"{bundle.samples_per_family} samples per family, start speed {bundle.start_speed:g} m/s"
    )

