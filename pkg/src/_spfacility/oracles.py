"""Optimal facility locations (1-center) and the prediction error."""
from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from _spfacility.metric import (
    Instance,
    MetricSpec,
    Point,
    Profile,
    distance,
    max_cost,
)
from _spfacility.util import Cache, InputError, SolverError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
"""Default tolerance of the minimax solver on the optimal cost."""
MAX_ITERATIONS = 200
"""Iteration cap of each golden-section level."""
DEFAULT_CELL_BUDGET = 10_000_000
"""Largest grid the brute-force oracle evaluates."""

_INV_PHI = (math.sqrt(5) - 1) / 2
_CHUNK_CELLS = 2_000_000


class Certificate(str, Enum):
    """How an :class:`OracleResult` was obtained."""

    CLOSED_FORM = "ClosedForm"
    CONVEX_MINIMAX = "ConvexMinimax"
    GRID = "Grid"


class OracleResult(NamedTuple):
    """An optimal facility location and the optimal maximum cost."""

    location: Point
    """the optimal location ``o(x)``"""
    cost: float
    """the optimal maximum cost, i.e. the radius of the smallest enclosing ball"""
    method: Certificate
    """solver that produced the result"""
    tolerance: float
    """bound on the difference between :attr:`cost` and the true optimum"""


class ErrorValue(NamedTuple):
    """The prediction error ``eta``; ``math.inf`` for a wrong guess on a zero-cost
    instance."""

    eta: float

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.eta)

    def __float__(self) -> float:
        return self.eta


def optimal_line(profile: Profile) -> OracleResult:
    """Return the optimum on the line: the midpoint of the extreme agents.

    :param profile: a one-dimensional profile
    :raises InputError: if *profile* is empty or not one-dimensional
    :returns: location ``(x_1 + x_n) / 2`` with cost ``(x_n - x_1) / 2``

    """
    if not profile.points:
        raise InputError("Optimal location of an empty profile is undefined")
    if profile.dimension != 1:
        raise InputError("optimal_line needs a one-dimensional profile")
    lowest, highest = profile.extremes()
    return OracleResult(
        ((lowest + highest) / 2,), (highest - lowest) / 2, Certificate.CLOSED_FORM, 0.0
    )


class _SearchResult(NamedTuple):
    argmin: float
    minimum: float
    iterations: int
    width: float


def _golden_section(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    tol: float,
    max_iterations: int,
) -> _SearchResult:
    """Minimize the convex function *f* over ``[lower, upper]``.

    Function values at the interior points are reused between iterations, so each
    iteration costs one evaluation. The search stops once the bracket is at most
    *tol* wide or floating point rounding keeps it from shrinking.

    """
    if upper - lower <= tol:
        middle = 0.5 * (lower + upper)
        return _SearchResult(middle, f(middle), 0, upper - lower)
    x1 = upper - _INV_PHI * (upper - lower)
    x2 = lower + _INV_PHI * (upper - lower)
    f1 = f(x1)
    f2 = f(x2)
    iterations = 0
    width = math.inf
    while tol < upper - lower < width and iterations < max_iterations:
        iterations += 1
        width = upper - lower
        if f2 > f1:
            upper, x2, f2 = x2, x1, f1
            x1 = upper - _INV_PHI * (upper - lower)
            f1 = f(x1)
        else:
            lower, x1, f1 = x1, x2, f2
            x2 = lower + _INV_PHI * (upper - lower)
            f2 = f(x2)
    middle = 0.5 * (lower + upper)
    best_value, best_point = min((f1, x1), (f2, x2), (f(middle), middle))
    return _SearchResult(best_point, best_value, iterations, upper - lower)


def optimal_lp_ball(
    profile: Profile,
    metric: MetricSpec,
    tol: float = DEFAULT_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> OracleResult:
    """Return the center and radius of the smallest l_p ball containing *profile*.

    ``f(y) = max_i d_p(x_i, y)`` is convex, and so are its coordinate sections. An
    outer golden-section search over the first coordinate minimizes
    ``g(a) = min_b f(a, b)``, which an inner golden-section search over ``b``
    evaluates. Both searches run over the profile's bounding box, which contains a
    minimizer for every ``p >= 1``.

    :param profile: a two-dimensional profile
    :param metric: a plane metric
    :param tol: requested tolerance on the optimal cost, raised to a few units in the
        last place of the largest coordinate when that is coarser
    :param max_iterations: iteration cap of each search level
    :raises InputError: if *metric* is not a plane or *tol* is not positive
    :raises SolverError: if a search level hits *max_iterations* first
    :returns: the result with certificate :attr:`Certificate.CONVEX_MINIMAX`

    """
    metric = metric.validate()
    if metric.is_line:
        raise InputError("optimal_lp_ball needs a plane metric")
    if not tol > 0:
        raise InputError(f"Tolerance must be positive, got {tol}")
    if profile.dimension != 2:
        raise InputError("optimal_lp_ball needs a two-dimensional profile")
    p = float(metric.p)  # type: ignore[arg-type]
    a_values = profile.coordinate(0)
    b_values = profile.coordinate(1)
    (a_low, a_high), (b_low, b_high) = profile.bounding_box()
    # a bracket narrower than a few ulps of the coordinates cannot be resolved
    magnitude = max([1.0] + [abs(c) for c in a_values + b_values])
    resolution = 8 * float(np.spacing(magnitude))
    stretch = 2 ** (1 / p)
    level_tol = max(tol / (2 * stretch), resolution)
    limit = max(tol, 2 * stretch * resolution)
    inner_widths: List[float] = []

    def cost_at(a: float, b: float) -> float:
        if p == 2:
            return max(math.hypot(ai - a, bi - b) for ai, bi in zip(a_values, b_values))
        if p == 1:
            return max(abs(ai - a) + abs(bi - b) for ai, bi in zip(a_values, b_values))
        largest = max(
            abs(ai - a) ** p + abs(bi - b) ** p for ai, bi in zip(a_values, b_values)
        )
        return largest ** (1.0 / p)

    def inner(a: float) -> float:
        result = _golden_section(
            lambda b: cost_at(a, b), b_low, b_high, level_tol, max_iterations
        )
        inner_widths.append(result.width)
        return result.minimum

    outer = _golden_section(inner, a_low, a_high, level_tol, max_iterations)
    best_b = _golden_section(
        lambda b: cost_at(outer.argmin, b), b_low, b_high, level_tol, max_iterations
    )
    location = (outer.argmin, best_b.argmin)
    cost = max_cost(metric, profile, location)
    achieved = stretch * (outer.width + max(inner_widths + [best_b.width]))
    logger.debug(
        f"Minimax search for {profile.n} agents in {metric}: {outer.iterations} outer "
        f"iterations, center {location}, cost {cost}, achieved tolerance {achieved}"
    )
    if achieved > limit:
        raise SolverError(location, cost, achieved, limit)
    return OracleResult(location, cost, Certificate.CONVEX_MINIMAX, achieved)


def grid_axis(lower: float, upper: float, step: float) -> np.ndarray:
    """Return ``lower + k * step`` up to *upper*, rounded to 12 decimals.

    *upper* is appended if the last grid value falls short of it.

    """
    count = int(math.floor((upper - lower) / step + 1e-9)) + 1
    axis = np.round(lower + step * np.arange(count), 12)
    if axis[-1] < upper:
        axis = np.append(axis, upper)
    return axis


def brute_force_center(
    profile: Profile,
    metric: MetricSpec,
    step: float,
    bounds: Optional[Sequence[Tuple[float, float]]] = None,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> OracleResult:
    """Return the grid point with the smallest maximum cost.

    This oracle is exhaustive and independent of :func:`optimal_lp_ball`, which makes
    it a cross-check for the convex solver.

    :param profile: the agent locations
    :param metric: the space
    :param step: grid spacing in every coordinate
    :param bounds: ``(min, max)`` per coordinate; must contain the profile's bounding
        box, which is the default
    :param cell_budget: largest admissible number of grid cells
    :raises InputError: on a non-positive *step*, bounds that miss an agent, or a grid
        larger than *cell_budget*
    :returns: the result with certificate :attr:`Certificate.GRID` and tolerance
        ``step * 2^(1/p)`` (``step`` on the line)

    """
    metric = metric.validate()
    if not step > 0:
        raise InputError(f"Grid step must be positive, got {step}")
    box = profile.bounding_box()
    if bounds is None:
        bounds = box
    if len(bounds) != metric.dimension:
        raise InputError(f"Bounds {bounds} do not match metric {metric}")
    for (lower, upper), (low, high) in zip(bounds, box):
        if lower > low or upper < high:
            raise InputError(f"Bounds {bounds} do not contain the profile {box}")
    axes = [grid_axis(lower, upper, step) for lower, upper in bounds]
    cells = math.prod(len(axis) for axis in axes)
    if cells > cell_budget:
        raise InputError(f"Grid of {cells} cells exceeds the budget of {cell_budget}")
    agents = np.asarray(profile.points, dtype=float)

    if metric.is_line:
        costs = np.max(np.abs(agents[:, 0][:, None] - axes[0][None, :]), axis=0)
        index = int(np.argmin(costs))
        location: Point = (float(axes[0][index]),)
        tolerance = step
    else:
        p = float(metric.p)  # type: ignore[arg-type]
        a_axis, b_axis = axes
        db = np.abs(agents[:, 1][:, None] - b_axis[None, :]) ** p
        rows = max(1, _CHUNK_CELLS // (len(agents) * len(b_axis)))
        best_value, best_cell = math.inf, (0, 0)
        for start in range(0, len(a_axis), rows):
            chunk = a_axis[start : start + rows]
            da = np.abs(agents[:, 0][:, None] - chunk[None, :]) ** p
            powered = np.max(da[:, :, None] + db[:, None, :], axis=0)
            flat = int(np.argmin(powered))
            value = float(powered.flat[flat])
            if value < best_value:
                row, column = divmod(flat, len(b_axis))
                best_value, best_cell = value, (start + row, column)
        location = (float(a_axis[best_cell[0]]), float(b_axis[best_cell[1]]))
        tolerance = step * 2 ** (1 / p)
    cost = max_cost(metric, profile, location)
    logger.debug(f"Grid oracle over {cells} cells: center {location}, cost {cost}")
    return OracleResult(location, cost, Certificate.GRID, tolerance)


_oracle_cache: Cache[Tuple[MetricSpec, Profile, float], OracleResult] = Cache(
    max_entries=4096
)


def optimal(
    metric: MetricSpec, profile: Profile, tol: float = DEFAULT_TOL
) -> OracleResult:
    """Return the optimum of *profile*, choosing the solver by metric kind.

    Results are memoised per ``(metric, profile, tol)``.

    :param metric: the space
    :param profile: the agent locations
    :param tol: solver tolerance for the plane
    :returns: :func:`optimal_line` on the line, :func:`optimal_lp_ball` in the plane

    """
    key = (metric, profile, tol)
    result = _oracle_cache.get(key)
    if result is None:
        if metric.validate().is_line:
            result = optimal_line(profile)
        else:
            result = optimal_lp_ball(profile, metric, tol)
        _oracle_cache.put(key, result)
    return result


def prediction_error(
    instance: Instance,
    tol: float = DEFAULT_TOL,
    oracle: Optional[OracleResult] = None,
) -> ErrorValue:
    """Return ``eta = d(o(x), pi) / MC(x, o(x))`` of *instance*.

    :param instance: the instance
    :param tol: solver tolerance, and the distance within which a prediction counts
        as exact on a zero-cost instance
    :param oracle: a precomputed optimum of the instance's profile
    :returns: the error; on a zero-cost instance 0 for an exact prediction and
        infinity otherwise

    """
    if oracle is None:
        oracle = optimal(instance.metric, instance.profile, tol)
    gap = distance(instance.metric, oracle.location, instance.prediction)
    if oracle.cost == 0:
        return ErrorValue(0.0 if gap <= tol else math.inf)
    return ErrorValue(gap / oracle.cost)
