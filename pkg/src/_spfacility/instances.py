"""Seeded random instance families and the named adversarial fixtures."""
from __future__ import annotations

import logging
import math
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from _spfacility.auditor import Deviation
from _spfacility.metric import Instance, MetricSpec, Point
from _spfacility.oracles import DEFAULT_TOL, optimal
from _spfacility.util import InputError, make_rng

logger = logging.getLogger(__name__)

MAX_REDRAWS = 100
"""How often :func:`gen_random` redraws a zero-cost profile before giving up."""


class FamilySpec(NamedTuple):
    """Parameters of a random instance family."""

    metric: MetricSpec
    n: int
    """number of agents"""
    box: Tuple[Tuple[float, float], ...]
    """``(min, max)`` of every coordinate of the agents"""
    eta_target: Optional[float] = None
    """prediction error of the generated instance; ``None`` for a uniform prediction"""
    seed: int = 0

    def validate(self) -> FamilySpec:
        """Return this spec if it describes a non-degenerate family.

        :raises InputError: otherwise
        :returns: the same object

        """
        self.metric.validate()
        if self.n < 1:
            raise InputError(f"A family needs at least one agent, got n={self.n}")
        if len(self.box) != self.metric.dimension:
            raise InputError(f"Box {self.box} does not match metric {self.metric}")
        if any(not lower < upper for lower, upper in self.box):
            raise InputError(f"Box {self.box} is degenerate")
        if self.eta_target is not None and not self.eta_target >= 0:
            raise InputError(f"Target error must be non-negative, got {self.eta_target}")
        return self


def gen_random(
    spec: FamilySpec,
    tol: float = DEFAULT_TOL,
    namespace: str = "gen",
    cell: Tuple[int, ...] = (),
) -> Instance:
    """Draw an instance of the family *spec*.

    Agents are i.i.d. uniform in the box. With a target error the prediction is placed
    at distance ``eta_target * r`` from the optimum ``o`` along a random direction
    (a random sign on the line, a uniform angle in the plane, rescaled to the l_p
    norm). Without one it is uniform in the box inflated by its width on each side.

    :param spec: the family, including its seed
    :param tol: solver tolerance used to locate the optimum
    :param namespace: name of the random stream, usually the calling subcommand
    :param cell: index of the instance inside a larger run, e.g. (eta index, trial)
    :raises InputError: if *spec* is invalid, or only zero-cost profiles were drawn
        for a positive target error
    :returns: the instance

    """
    spec = spec.validate()
    rng = make_rng(spec.seed, namespace, *cell)
    lows = [lower for lower, _ in spec.box]
    highs = [upper for _, upper in spec.box]
    for _ in range(MAX_REDRAWS):
        agents = rng.uniform(lows, highs, size=(spec.n, len(spec.box))).tolist()
        if spec.eta_target is None:
            widths = [upper - lower for lower, upper in spec.box]
            prediction = rng.uniform(
                [lower - width for lower, width in zip(lows, widths)],
                [upper + width for upper, width in zip(highs, widths)],
            ).tolist()
            return Instance.create(spec.metric, agents, prediction)
        instance = Instance.create(spec.metric, agents, agents[0])
        oracle = optimal(instance.metric, instance.profile, tol)
        if oracle.cost == 0 and spec.eta_target > 0:
            logger.debug("Drew a zero-cost profile, drawing again")
            continue
        radius = spec.eta_target * oracle.cost
        return instance.with_prediction(
            _offset(spec.metric, oracle.location, radius, rng)
        )
    raise InputError(
        f"Could not draw a profile with positive cost in {MAX_REDRAWS} attempts"
    )


def _offset(
    metric: MetricSpec, origin: Point, radius: float, rng: np.random.Generator
) -> Point:
    if metric.is_line:
        sign = 1.0 if rng.integers(0, 2) else -1.0
        return (origin[0] + sign * radius,)
    angle = rng.uniform(0.0, 2 * math.pi)
    direction = (math.cos(angle), math.sin(angle))
    p = float(metric.p)  # type: ignore[arg-type]
    norm = (abs(direction[0]) ** p + abs(direction[1]) ** p) ** (1 / p)
    scale = radius / norm
    return (origin[0] + scale * direction[0], origin[1] + scale * direction[1])


def fixture_minmaxp_tight(eta: float) -> Instance:
    """Return the line profile (0, 2) with the prediction ``1 + eta``.

    The prediction error is ``eta`` and MinMaxP's ratio is ``1 + min(1, eta)``.

    """
    if not eta >= 0:
        raise InputError(f"eta must be non-negative, got {eta}")
    return Instance.create(MetricSpec.line(), [0.0, 2.0], [1.0 + eta])


def fixture_rand_lb() -> Tuple[Instance, Instance]:
    """Return the instance pair behind the 3/2 lower bound for randomized mechanisms.

    The first is (0, 2) with the exact prediction 1, the second is (0, 4) with the
    same prediction, which has error 1/2 there.

    """
    line = MetricSpec.line()
    return (
        Instance.create(line, [0.0, 2.0], [1.0]),
        Instance.create(line, [0.0, 4.0], [1.0]),
    )


def fixture_bbox_tight(p: float, eta: float) -> Instance:
    """Return three agents on the l_p unit circle with a prediction of error *eta*.

    The agents are ``(-c, -c)``, ``(0, 1)``, ``(1, 0)`` with ``c = 2^(-1/p)``, the
    optimum is the origin with cost 1, and the prediction ``(eta c, eta c)`` makes
    BoundingBox reach the ratio ``1 + min(eta, 2^(1/p))``.

    """
    if not p >= 2:
        raise InputError(f"The tight BoundingBox example needs p >= 2, got {p}")
    if not eta >= 0:
        raise InputError(f"eta must be non-negative, got {eta}")
    corner = 2 ** (-1 / p)
    offset = (eta**p / 2) ** (1 / p)
    return Instance.create(
        MetricSpec.plane(p),
        [(-corner, -corner), (0.0, 1.0), (1.0, 0.0)],
        (offset, offset),
    )


def fixture_cm_tight(p: float) -> Instance:
    """Return agents (0, 0), (0, 0), (1, 1), on which CoordMedian has ratio 2."""
    return Instance.create(
        MetricSpec.plane(p), [(0.0, 0.0), (0.0, 0.0), (1.0, 1.0)], (0.5, 0.5)
    )


def fixture_lrm_sgsp() -> Tuple[Instance, Deviation]:
    """Return the profile (0, 1, 2) and the coalition move of all agents to 1.

    The move leaves agents 1 and 3 at cost 1 under LRM and lowers agent 2's cost from
    1/2 to 0, so LRM is not strongly group strategyproof.

    :returns: the instance and the coalition's deviation

    """
    instance = Instance.create(MetricSpec.line(), [0.0, 1.0, 2.0], [1.0])
    deviation = Deviation(
        coalition=(0, 1, 2),
        misreports=((1.0,), (1.0,), (1.0,)),
        deltas=(0.0, 0.5, 0.0),
    )
    return instance, deviation


def fixture_sgsp_moving(k: int, prediction: float = 0.0) -> List[Instance]:
    """Return the profiles ``(0, 1, 2 + j/100)`` for ``j = 0, ..., k``.

    :param k: number of steps
    :param prediction: prediction shared by all instances
    :returns: ``k + 1`` instances

    """
    if k < 0:
        raise InputError(f"k must be non-negative, got {k}")
    line = MetricSpec.line()
    return [
        Instance.create(line, [0.0, 1.0, 2.0 + step / 100], [prediction])
        for step in range(k + 1)
    ]


def _single(instance: Instance) -> List[Instance]:
    return [instance]


_fixtures: Dict[str, Callable[..., List[Instance]]] = {
    "minmaxp_tight": lambda eta=0.5: _single(fixture_minmaxp_tight(float(eta))),
    "rand_lb": lambda: list(fixture_rand_lb()),
    "bbox_tight": lambda p=2.0, eta=1.0: _single(
        fixture_bbox_tight(float(p), float(eta))
    ),
    "cm_tight": lambda p=2.0: _single(fixture_cm_tight(float(p))),
    "lrm_sgsp": lambda: _single(fixture_lrm_sgsp()[0]),
    "sgsp_moving": lambda k=100, prediction=0.0: fixture_sgsp_moving(
        int(k), float(prediction)
    ),
}


def fixture_names() -> List[str]:
    """Return the names under which fixtures are addressable."""
    return list(_fixtures)


def resolve_fixture(address: str) -> List[Instance]:
    """Return the instances of the fixture at *address*.

    An address is ``name`` or ``name:key=value,...``, for example
    ``bbox_tight:p=3,eta=1``. The common parameter ``index`` selects one instance of a
    multi-instance fixture, e.g. ``rand_lb:index=1``.

    :param address: the fixture address
    :raises InputError: on an unknown name or malformed parameters
    :returns: the fixture's instances

    """
    name, _, arguments = address.partition(":")
    if name not in _fixtures:
        raise InputError(
            f"Unknown fixture '{name}', choose one of {', '.join(_fixtures)}"
        )
    parameters: Dict[str, str] = {}
    for item in filter(None, arguments.split(",")):
        key, separator, value = item.partition("=")
        if not separator:
            raise InputError(f"Malformed fixture parameter '{item}' in '{address}'")
        parameters[key.strip()] = value.strip()
    index = parameters.pop("index", None)
    try:
        instances = _fixtures[name](**parameters)
    except (TypeError, ValueError) as exception:
        raise InputError(f"Invalid parameters for fixture '{name}': {exception}") from exception
    if index is not None:
        try:
            return [instances[int(index)]]
        except (IndexError, ValueError) as exception:
            raise InputError(f"Fixture '{name}' has no instance {index}") from exception
    return instances
