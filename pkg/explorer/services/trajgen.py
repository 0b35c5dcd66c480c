"""Minimum-snap segment solver and polynomial evaluation.

With position, velocity, acceleration and jerk pinned at both ends, the
Euler-Lagrange stationarity condition of the integrated squared snap leaves
exactly the degree-7 polynomial family, so the 8 boundary conditions fix the
optimum per axis. The system is solved in normalized time tau = t / T and the
result is converted back to monomial coefficients in absolute seconds.
"""
import math

import numpy as np
from numpy.polynomial import polynomial as P

from explorer.core.exceptions import (
    InvalidDerivativeOrder,
    NonFiniteInput,
    NonPositiveDuration,
    SolverFailure,
    TimeOutOfRange,
)
from explorer.models.trajectory import POLY_ORDER, BoundaryState, Segment3D

CONSTRAINED_ORDERS = 4
MAX_DERIVATIVE_ORDER = 4
_TIME_TOLERANCE = 1e-12


def derivative_row(t: float, order: int, size: int = POLY_ORDER) -> np.ndarray:
    """Row of d^order/dt^order [1, t, ..., t^(size-1)] evaluated at t."""
    row = np.zeros(size)
    for k in range(order, size):
        row[k] = math.factorial(k) / math.factorial(k - order) * t ** (k - order)
    return row


def _normalized_inverse() -> np.ndarray:
    system = np.vstack(
        [derivative_row(0.0, d) for d in range(CONSTRAINED_ORDERS)]
        + [derivative_row(1.0, d) for d in range(CONSTRAINED_ORDERS)]
    )
    try:
        return np.linalg.inv(system)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure("normalized boundary system is singular") from exc


_NORMALIZED_INVERSE = _normalized_inverse()


def _check_duration(duration: float) -> None:
    if not math.isfinite(duration):
        raise NonFiniteInput(f"duration must be finite, got {duration}")
    if duration <= 0:
        raise NonPositiveDuration(f"duration must be > 0, got {duration}")


def solve_min_snap_coefficients(
    start: np.ndarray, end: np.ndarray, duration: float
) -> np.ndarray:
    """Vectorized solve.

    `start` and `end` have shape (..., 4, 3): derivative order by axis.
    Returns coefficients of shape (..., 3, 8).
    """
    _check_duration(duration)
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    if not (np.all(np.isfinite(start)) and np.all(np.isfinite(end))):
        raise NonFiniteInput("boundary values must be finite")

    scale = duration ** np.arange(CONSTRAINED_ORDERS)
    rhs = np.concatenate([start, end], axis=-2) * np.concatenate([scale, scale])[:, None]
    normalized = np.einsum("kj,...ja->...ak", _NORMALIZED_INVERSE, rhs)
    coefficients = normalized / duration ** np.arange(POLY_ORDER)
    if not np.all(np.isfinite(coefficients)):
        raise SolverFailure("minimum-snap solve produced non-finite coefficients")
    return coefficients


def solve_min_snap_segment(start: BoundaryState, end: BoundaryState, duration: float) -> Segment3D:
    coefficients = solve_min_snap_coefficients(start.as_matrix(), end.as_matrix(), duration)
    return Segment3D(coefficients, float(duration))


def _check_order(derivative_order: int) -> None:
    if (
        isinstance(derivative_order, bool)
        or not isinstance(derivative_order, (int, np.integer))
        or not 0 <= derivative_order <= MAX_DERIVATIVE_ORDER
    ):
        raise InvalidDerivativeOrder(
            f"derivative order must be an integer in 0..{MAX_DERIVATIVE_ORDER}, "
            f"got {derivative_order}"
        )


def sample_segment(segment: Segment3D, times: np.ndarray, derivative_order: int = 0) -> np.ndarray:
    """Evaluate at many times at once; returns shape (len(times), 3)."""
    _check_order(derivative_order)
    times = np.asarray(times, dtype=float)
    tol = _TIME_TOLERANCE * max(1.0, segment.duration)
    if times.size and (times.min() < -tol or times.max() > segment.duration + tol):
        raise TimeOutOfRange(f"times must lie in [0, {segment.duration}]")
    derived = P.polyder(segment.coefficients, m=derivative_order, axis=1)
    return P.polyval(times, derived.T).T


def evaluate(segment: Segment3D, t: float, derivative_order: int) -> np.ndarray:
    _check_order(derivative_order)
    tol = _TIME_TOLERANCE * max(1.0, segment.duration)
    if not (-tol <= t <= segment.duration + tol):
        raise TimeOutOfRange(f"t={t} outside [0, {segment.duration}]")
    derived = P.polyder(segment.coefficients, m=derivative_order, axis=1)
    return P.polyval(float(t), derived.T)


def snap_gram(duration: float) -> np.ndarray:
    """Q with c^T Q c = integral over [0, duration] of (c'''')^2."""
    _check_duration(duration)
    gram = np.zeros((POLY_ORDER, POLY_ORDER))
    for i in range(4, POLY_ORDER):
        for j in range(4, POLY_ORDER):
            power = i + j - 7
            gram[i, j] = (
                math.factorial(i) / math.factorial(i - 4)
                * math.factorial(j) / math.factorial(j - 4)
                * duration**power / power
            )
    return gram


def snap_cost(segment: Segment3D) -> float:
    gram = snap_gram(segment.duration)
    c = segment.coefficients
    cost = float(np.einsum("ai,ij,aj->", c, gram, c))
    return max(cost, 0.0)


def boundary_from_segment(segment: Segment3D, t: float) -> BoundaryState:
    return BoundaryState(*(evaluate(segment, t, order) for order in range(CONSTRAINED_ORDERS)))


def transform_segment(
    segment: Segment3D, rotation: np.ndarray, translation: np.ndarray
) -> Segment3D:
    """Rigidly move a segment: p'(t) = rotation @ p(t) + translation."""
    coefficients = np.asarray(rotation, dtype=float) @ segment.coefficients
    coefficients[:, 0] += np.asarray(translation, dtype=float)
    return Segment3D(coefficients, segment.duration)
