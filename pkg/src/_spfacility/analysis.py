"""Approximation ratios, their closed-form bounds and error-parametrized curves."""
from __future__ import annotations

import itertools
import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

from _spfacility.instances import FamilySpec, gen_random
from _spfacility.mechanisms import MechanismId, MechanismSpec, run
from _spfacility.metric import (
    Instance,
    MetricSpec,
    ObjectiveMode,
    Point,
    Profile,
    expected_objective,
)
from _spfacility.oracles import (
    DEFAULT_CELL_BUDGET,
    DEFAULT_TOL,
    ErrorValue,
    OracleResult,
    grid_axis,
    optimal,
    prediction_error,
)
from _spfacility.util import (
    InputError,
    UnsupportedBoundError,
    parallel_map,
)

logger = logging.getLogger(__name__)

BOUND_TOL = 1e-6
"""Slack allowed between an observed ratio and its closed-form bound."""
PROBE_STEP_DIVISOR = 100
"""Default prediction grid step of :func:`robustness_probe`, as a fraction of the
profile diameter."""


class RatioReport(NamedTuple):
    """Approximation ratio of one mechanism on one instance."""

    mechanism_cost: float
    optimal_cost: float
    ratio: float
    """``mechanism_cost / optimal_cost``; 1 or infinity on a zero-cost instance"""
    eta: ErrorValue
    mode: ObjectiveMode
    bound: Optional[float] = None
    """closed-form bound at :attr:`eta`, ``None`` if the mechanism has none"""

    @property
    def within_bound(self) -> bool:
        """Whether the ratio does not exceed the bound (true when there is none)."""
        return self.bound is None or self.ratio <= self.bound + BOUND_TOL


class CurvePoint(NamedTuple):
    """One row of a ``gamma(eta)`` curve."""

    eta: float
    worst_ratio: Optional[float]
    """largest observed ratio, ``None`` without trials"""
    mean_ratio: Optional[float]
    bound: Optional[float]
    trials: int


class ProbeResult(NamedTuple):
    """Worst ratio found by a search over predictions, with the grid searched."""

    report: RatioReport
    """report of the worst prediction"""
    prediction: Point
    """the worst prediction"""
    bounds: Tuple[Tuple[float, float], ...]
    step: float
    cells: int


def approx_ratio(
    spec: MechanismSpec,
    instance: Instance,
    mode: ObjectiveMode = ObjectiveMode.EXPECTED_MAX,
    tol: float = DEFAULT_TOL,
    oracle: Optional[OracleResult] = None,
) -> RatioReport:
    """Run mechanism *spec* on *instance* and compare it with the optimum.

    :param spec: the mechanism
    :param instance: profile and prediction
    :param mode: aggregation of randomized outcomes
    :param tol: solver tolerance; on a zero-cost instance a mechanism cost up to
        *tol* counts as optimal
    :param oracle: a precomputed optimum of the instance's profile
    :raises InputError: if the mechanism is not defined on the instance's space
    :raises SolverError: if the optimum can not be certified
    :returns: the report, including the closed-form bound if there is one

    """
    if oracle is None:
        oracle = optimal(instance.metric, instance.profile, tol)
    outcome = run(spec, instance)
    cost = expected_objective(instance.metric, instance.profile, outcome, mode)
    eta = prediction_error(instance, tol, oracle)
    if oracle.cost == 0:
        ratio = 1.0 if cost <= tol else math.inf
    else:
        ratio = cost / oracle.cost
    return RatioReport(
        cost, oracle.cost, ratio, eta, mode, _bound_or_none(spec, eta.eta, instance)
    )


def _bound_or_none(
    spec: MechanismSpec, eta: float, instance: Instance
) -> Optional[float]:
    try:
        return closed_form_bound(spec, eta, instance.metric.p)
    except UnsupportedBoundError:
        return None


def closed_form_bound(
    spec: MechanismSpec, eta: float, p: Optional[float] = None
) -> float:
    """Return the proven approximation bound of *spec* at prediction error *eta*.

    ==============  ===========================================
    MinMaxP         ``1 + min(1, eta)``
    RandLine1C2R    ``1 + min(1, eta)``
    Median          ``2``
    LRM             ``3/2``
    MixedLine       ``1 + q/2 + (1 - q) min(1, eta)``
    BoundingBox     ``1 + min(eta, 2^(1/p))``
    CoordMedian     ``2``
    Mixed2D         ``1 + q + (1 - q) min(2^(1/p), eta)``
    ==============  ===========================================

    :param spec: the mechanism
    :param eta: the prediction error, ``math.inf`` for an arbitrarily wrong one
    :param p: exponent of the plane, required by the planar mechanisms
    :raises UnsupportedBoundError: for a mechanism without a proven bound, or the line
        Median asked for a planar bound
    :raises InputError: on a negative *eta* or a planar mechanism without *p*
    :returns: the bound

    """
    spec = spec.validate()
    if not eta >= 0:
        raise InputError(f"eta must be non-negative, got {eta}")
    mechanism = spec.id
    if mechanism in (MechanismId.MIN_MAX_P, MechanismId.RAND_LINE_1C2R):
        return 1 + min(1.0, eta)
    if mechanism == MechanismId.MEDIAN:
        if p is not None:
            raise UnsupportedBoundError(spec.label, f"no bound in the l_{p:g} plane")
        return 2.0
    if mechanism == MechanismId.LRM:
        return 1.5
    if mechanism == MechanismId.MIXED_LINE:
        q = float(spec.q)  # type: ignore[arg-type]
        return 1 + q / 2 + (1 - q) * min(1.0, eta)
    if mechanism == MechanismId.COORD_MEDIAN:
        return 2.0
    if mechanism in (MechanismId.BOUNDING_BOX, MechanismId.MIXED_2D):
        if p is None:
            raise InputError(f"The bound of {spec.label} depends on p")
        diagonal = 2 ** (1 / p)
        if mechanism == MechanismId.BOUNDING_BOX:
            return 1 + min(eta, diagonal)
        q = float(spec.q)  # type: ignore[arg-type]
        return 1 + q + (1 - q) * min(diagonal, eta)
    raise UnsupportedBoundError(spec.label)


def guarantees(spec: MechanismSpec, p: Optional[float] = None) -> Tuple[float, float]:
    """Return consistency and robustness of *spec*.

    Consistency is the bound at ``eta = 0``, robustness its limit for arbitrarily
    wrong predictions.

    :param spec: the mechanism
    :param p: exponent of the plane for planar mechanisms
    :returns: ``(consistency, robustness)``

    """
    return closed_form_bound(spec, 0.0, p), closed_form_bound(spec, math.inf, p)


def gamma_sweep(
    spec: MechanismSpec,
    family: FamilySpec,
    eta_grid: Sequence[float],
    trials: int,
    mode: ObjectiveMode = ObjectiveMode.EXPECTED_MAX,
    tol: float = DEFAULT_TOL,
    threads: int = 0,
) -> List[CurvePoint]:
    """Measure the worst ratio of *spec* on random instances of every error in
    *eta_grid*.

    Trial ``t`` at grid index ``i`` draws from the random stream ``("sweep", i, t)``
    of the family's seed, so results do not depend on *threads*.

    :param spec: the mechanism
    :param family: the instance family; its ``eta_target`` is replaced by each grid
        value
    :param eta_grid: the prediction errors
    :param trials: instances per grid value
    :param mode: aggregation of randomized outcomes
    :param tol: solver tolerance
    :param threads: size of the worker pool, 0 for one thread per CPU
    :raises InputError: on a negative trial count or a mechanism that is not defined
        on the family's metric
    :returns: one curve point per grid value, in grid order

    """
    if trials < 0:
        raise InputError(f"Trial count must be non-negative, got {trials}")
    if not spec.validate().supports(family.metric):
        raise InputError(f"Mechanism {spec.label} is not defined on {family.metric}")
    cells = list(itertools.product(range(len(eta_grid)), range(trials)))

    def evaluate(cell: Tuple[int, int]) -> float:
        target = family._replace(eta_target=float(eta_grid[cell[0]]))
        instance = gen_random(target, tol, "sweep", cell)
        return approx_ratio(spec, instance, mode, tol).ratio

    logger.info(
        f"Sweeping {spec.label} over {len(eta_grid)} error values with {trials} "
        f"trials each"
    )
    ratios = parallel_map(evaluate, cells, threads)
    curve = []
    for index, eta in enumerate(eta_grid):
        observed = ratios[index * trials : (index + 1) * trials]
        try:
            bound: Optional[float] = closed_form_bound(spec, float(eta), family.metric.p)
        except UnsupportedBoundError:
            bound = None
        curve.append(
            CurvePoint(
                eta=float(eta),
                worst_ratio=max(observed) if observed else None,
                mean_ratio=math.fsum(observed) / len(observed) if observed else None,
                bound=bound,
                trials=trials,
            )
        )
        logger.debug(f"eta={eta}: {curve[-1]}")
    return curve


def robustness_probe(
    spec: MechanismSpec,
    metric: MetricSpec,
    profile: Profile,
    step: Optional[float] = None,
    bounds: Optional[Sequence[Tuple[float, float]]] = None,
    mode: ObjectiveMode = ObjectiveMode.EXPECTED_MAX,
    tol: float = DEFAULT_TOL,
    threads: int = 0,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> ProbeResult:
    """Search a grid of predictions for the worst ratio of *spec* on *profile*.

    The result is the largest ratio on the grid, a lower estimate of the robustness
    of *spec* on this profile.

    :param spec: the mechanism
    :param metric: the space
    :param profile: the agent locations
    :param step: grid spacing, by default the diameter ``D`` of the profile divided by
        :data:`PROBE_STEP_DIVISOR` (``D = 1`` for a coincident profile)
    :param bounds: ``(min, max)`` per coordinate, by default the bounding box inflated
        by ``D`` on every side
    :param mode: aggregation of randomized outcomes
    :param tol: solver tolerance
    :param threads: size of the worker pool, 0 for one thread per CPU
    :param cell_budget: largest admissible number of grid predictions
    :raises InputError: on a non-positive step or a grid larger than *cell_budget*
    :returns: the worst prediction found, its report and the grid

    """
    metric = metric.validate()
    diameter = profile.diameter(metric) or 1.0
    if step is None:
        step = diameter / PROBE_STEP_DIVISOR
    if not step > 0:
        raise InputError(f"Grid step must be positive, got {step}")
    if bounds is None:
        bounds = tuple(
            (lower - diameter, upper + diameter)
            for lower, upper in profile.bounding_box()
        )
    bounds = tuple((float(lower), float(upper)) for lower, upper in bounds)
    if len(bounds) != metric.dimension:
        raise InputError(f"Bounds {bounds} do not match metric {metric}")
    axes = [grid_axis(lower, upper, step).tolist() for lower, upper in bounds]
    predictions: List[Point] = [tuple(point) for point in itertools.product(*axes)]
    if len(predictions) > cell_budget:
        raise InputError(
            f"Grid of {len(predictions)} predictions exceeds the budget of {cell_budget}"
        )
    oracle = optimal(metric, profile, tol)
    template = Instance(metric, profile, predictions[0])

    def evaluate(prediction: Point) -> RatioReport:
        return approx_ratio(
            spec, template.with_prediction(prediction), mode, tol, oracle
        )

    reports = parallel_map(evaluate, predictions, threads)
    # first maximum in grid order
    worst = max(range(len(reports)), key=lambda index: reports[index].ratio)
    logger.info(
        f"Robustness probe of {spec.label} over {len(predictions)} predictions: worst "
        f"ratio {reports[worst].ratio} at {predictions[worst]}"
    )
    return ProbeResult(
        reports[worst], predictions[worst], tuple(bounds), step, len(predictions)
    )


def bound_violations(
    spec: MechanismSpec,
    instances: Sequence[Instance],
    mode: ObjectiveMode = ObjectiveMode.EXPECTED_MAX,
    tol: float = DEFAULT_TOL,
) -> List[Tuple[Instance, RatioReport]]:
    """Return the instances on which *spec* exceeds its closed-form bound.

    :param spec: the mechanism
    :param instances: the instances to evaluate
    :param mode: aggregation of randomized outcomes
    :param tol: solver tolerance
    :returns: ``(instance, report)`` pairs, empty if every ratio is within bound

    """
    violations = []
    for instance in instances:
        report = approx_ratio(spec, instance, mode, tol)
        if not report.within_bound:
            violations.append((instance, report))
    return violations
