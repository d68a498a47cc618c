"""Worst-case probes that run mechanisms on the adversarial fixtures."""
from __future__ import annotations

import logging
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple

from _spfacility.analysis import CurvePoint, approx_ratio, closed_form_bound
from _spfacility.instances import (
    fixture_bbox_tight,
    fixture_minmaxp_tight,
    fixture_rand_lb,
    fixture_sgsp_moving,
)
from _spfacility.mechanisms import MechanismId, MechanismSpec, run
from _spfacility.metric import ObjectiveMode
from _spfacility.oracles import DEFAULT_TOL
from _spfacility.util import ABS_TOL, InputError

logger = logging.getLogger(__name__)


class LowerBoundProbe(NamedTuple):
    """Ratios of a mechanism on the pair of instances from :func:`fixture_rand_lb`."""

    ratios: Tuple[float, float]
    worst: float


def randomized_lower_bound_probe(
    spec: MechanismSpec, mode: ObjectiveMode = ObjectiveMode.EXPECTED_MAX
) -> LowerBoundProbe:
    """Return the worst ratio of line mechanism *spec* on the two lower-bound instances.

    The profiles (0, 2) and (0, 4) share the prediction 1, exact for the first and of
    error 1/2 for the second. A strategyproof mechanism that is optimal on the first
    cannot move far enough on the second, so every such mechanism scores at least
    3/2 here.

    """
    first, second = fixture_rand_lb()
    ratios = (
        approx_ratio(spec, first, mode).ratio,
        approx_ratio(spec, second, mode).ratio,
    )
    logger.info(f"Lower bound probe of {spec.label}: ratios {ratios}")
    return LowerBoundProbe(ratios, max(ratios))


def _tightness_point(
    spec: MechanismSpec, ratio: float, eta: float, p: Optional[float] = None
) -> CurvePoint:
    return CurvePoint(
        eta=eta,
        worst_ratio=ratio,
        mean_ratio=ratio,
        bound=closed_form_bound(spec, eta, p),
        trials=1,
    )


def minmaxp_tightness_curve(eta_grid: Sequence[float]) -> List[CurvePoint]:
    """Return MinMaxP's ratio on :func:`fixture_minmaxp_tight` for every error."""
    spec = MechanismSpec(MechanismId.MIN_MAX_P)
    return [
        _tightness_point(
            spec, approx_ratio(spec, fixture_minmaxp_tight(float(eta))).ratio, float(eta)
        )
        for eta in eta_grid
    ]


def bbox_tightness_curve(
    p: float, eta_grid: Sequence[float], tol: float = DEFAULT_TOL
) -> List[CurvePoint]:
    """Return BoundingBox's ratio on :func:`fixture_bbox_tight` for every error.

    :param p: exponent of the plane, at least 2
    :param eta_grid: the prediction errors
    :param tol: solver tolerance
    :returns: one curve point per error

    """
    spec = MechanismSpec(MechanismId.BOUNDING_BOX)
    curve = []
    for eta in eta_grid:
        report = approx_ratio(
            spec, fixture_bbox_tight(p, float(eta)), ObjectiveMode.EXPECTED_MAX, tol
        )
        curve.append(_tightness_point(spec, report.ratio, float(eta), p))
    return curve


class Side(str, Enum):
    """Where the support of an outcome lies relative to the three agents."""

    LEFT = "left"
    """inside ``[x_1, x_2]``"""
    RIGHT = "right"
    """inside ``[x_2, x_3]``"""
    SPLIT = "split"
    """on both sides of ``x_2``, or outside ``[x_1, x_3]``"""


class MovingStep(NamedTuple):
    """One step of :func:`sgsp_moving_probe`."""

    step: int
    rightmost: float
    """location ``x_3`` of the moving agent"""
    ratio: float
    side: Side


def sgsp_moving_probe(
    spec: MechanismSpec,
    k: int,
    prediction: float = 0.0,
    mode: ObjectiveMode = ObjectiveMode.EXPECTED_MAX,
) -> List[MovingStep]:
    """Run line mechanism *spec* while the rightmost of three agents walks away.

    A prediction-free strongly group strategyproof mechanism with ratio at most 2
    must keep its support on one side of the middle agent; :attr:`MovingStep.side`
    records which.

    :param spec: a line mechanism
    :param k: number of steps of size 1/100, starting from (0, 1, 2)
    :param prediction: prediction used at every step
    :param mode: aggregation of randomized outcomes
    :raises InputError: on a planar mechanism or negative *k*
    :returns: ``k + 1`` steps

    """
    if spec.is_planar:
        raise InputError(f"{spec.label} is not a line mechanism")
    steps = []
    for step, instance in enumerate(fixture_sgsp_moving(k, prediction)):
        first, middle, last = instance.profile.sorted_view()
        support = [point[0] for point in run(spec, instance).points]
        if all(first - ABS_TOL <= y <= middle + ABS_TOL for y in support):
            side = Side.LEFT
        elif all(middle - ABS_TOL <= y <= last + ABS_TOL for y in support):
            side = Side.RIGHT
        else:
            side = Side.SPLIT
        steps.append(
            MovingStep(step, last, approx_ratio(spec, instance, mode).ratio, side)
        )
    logger.info(
        f"Moving probe of {spec.label}: final ratio {steps[-1].ratio}, sides "
        f"{sorted({s.side.value for s in steps})}"
    )
    return steps
