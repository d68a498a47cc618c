"""Points, profiles, metrics and the maximum-cost objective."""
from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from _spfacility.util import WEIGHT_TOL, InputError

logger = logging.getLogger(__name__)

Point = Tuple[float, ...]
"""Type alias for a location: one coordinate on the line, two in the plane."""


class MetricKind(str, Enum):
    """The two supported spaces."""

    LINE = "line"
    PLANE = "l2p"


class ObjectiveMode(str, Enum):
    """Aggregation of the maximum cost over a randomized outcome."""

    EXPECTED_MAX = "ExpectedMax"
    """Expectation of the maximum agent cost."""
    MAX_OF_EXPECTED = "MaxOfExpected"
    """Maximum over agents of the expected agent cost."""


class MetricSpec(NamedTuple):
    """Which space the points of an instance live in."""

    kind: MetricKind
    """the real line or the plane"""
    p: Optional[float] = None
    """exponent of the l_p norm, only present for the plane"""

    @classmethod
    def line(cls) -> MetricSpec:
        """Return the metric of the real line."""
        return cls(MetricKind.LINE)

    @classmethod
    def plane(cls, p: float) -> MetricSpec:
        """Return the plane with the l_p distance.

        :param p: finite exponent, at least 1
        :raises InputError: if *p* is not a finite real of at least 1
        :returns: the validated metric

        """
        return cls(MetricKind.PLANE, float(p)).validate()

    def validate(self) -> MetricSpec:
        """Return this metric if its invariants hold.

        :raises InputError: on a plane without a finite ``p >= 1`` or a line with ``p``
        :returns: the metric itself

        """
        if self.kind == MetricKind.LINE:
            if self.p is not None:
                raise InputError("The line metric does not take an exponent p")
        elif self.kind == MetricKind.PLANE:
            if self.p is None or not math.isfinite(self.p) or self.p < 1:
                raise InputError(f"Plane metric needs a finite p >= 1, got {self.p}")
        else:
            raise InputError(f"Unknown metric kind {self.kind}")
        return self

    @property
    def dimension(self) -> int:
        """Number of coordinates of a point."""
        return 1 if self.kind == MetricKind.LINE else 2

    @property
    def is_line(self) -> bool:
        return self.kind == MetricKind.LINE

    def __str__(self) -> str:
        return "line" if self.is_line else f"l2p(p={self.p:g})"


def make_point(coords: Iterable[float]) -> Point:
    """Return *coords* as a point of finite floats.

    :param coords: the coordinates
    :raises InputError: if a coordinate is not finite
    :returns: the point

    """
    point = tuple(float(c) for c in coords)
    if not point or not all(math.isfinite(c) for c in point):
        raise InputError(f"Invalid point {point}")
    return point


def _check_point(metric: MetricSpec, point: Point) -> None:
    if len(point) != metric.dimension:
        raise InputError(
            f"Point {point} has {len(point)} coordinates, metric {metric} needs "
            f"{metric.dimension}"
        )


class Profile(NamedTuple):
    """Reported agent locations, in agent order."""

    points: Tuple[Point, ...]

    @classmethod
    def of(cls, points: Iterable[Iterable[float]]) -> Profile:
        """Create a profile from *points*.

        Scalars are accepted as one-dimensional points.

        :param points: the agent locations
        :raises InputError: if the profile is empty or mixes dimensions
        :returns: the profile

        """
        converted: List[Point] = []
        for point in points:
            if isinstance(point, (int, float)):
                converted.append(make_point([point]))
            else:
                converted.append(make_point(point))
        if not converted:
            raise InputError("A profile needs at least one agent")
        if len({len(point) for point in converted}) != 1:
            raise InputError("All points of a profile need the same dimension")
        return cls(tuple(converted))

    @property
    def n(self) -> int:
        """Number of agents."""
        return len(self.points)

    @property
    def dimension(self) -> int:
        return len(self.points[0])

    def coordinate(self, axis: int) -> List[float]:
        """Return coordinate *axis* of every agent, in agent order."""
        return [point[axis] for point in self.points]

    def sorted_view(self) -> List[float]:
        """Return the line locations sorted as ``x_1 <= ... <= x_n``."""
        return sorted(self.coordinate(0))

    def extremes(self) -> Tuple[float, float]:
        """Return ``(x_1, x_n)`` of a line profile."""
        values = self.coordinate(0)
        return min(values), max(values)

    def bounding_box(self) -> Tuple[Tuple[float, float], ...]:
        """Return ``(min, max)`` of every coordinate."""
        return tuple(
            (min(self.coordinate(axis)), max(self.coordinate(axis)))
            for axis in range(self.dimension)
        )

    def is_coincident(self) -> bool:
        """Return whether all agents report the same location."""
        return all(point == self.points[0] for point in self.points)

    def replace(self, indices: Sequence[int], points: Sequence[Point]) -> Profile:
        """Return a copy in which agent ``indices[k]`` reports ``points[k]``."""
        updated = list(self.points)
        for index, point in zip(indices, points):
            updated[index] = point
        return Profile(tuple(updated))

    def diameter(self, metric: MetricSpec) -> float:
        """Return the largest distance between two agents."""
        return max(
            (
                distance(metric, a, b)
                for i, a in enumerate(self.points)
                for b in self.points[i + 1 :]
            ),
            default=0.0,
        )


class Instance(NamedTuple):
    """A profile together with a prediction in the same space."""

    metric: MetricSpec
    profile: Profile
    prediction: Point

    @classmethod
    def create(
        cls,
        metric: MetricSpec,
        agents: Iterable[Iterable[float]],
        prediction: Iterable[float],
    ) -> Instance:
        """Create and validate an instance.

        :param metric: the space
        :param agents: agent locations; scalars are accepted on the line
        :param prediction: the predicted optimal location; a scalar is accepted on
            the line
        :raises InputError: if the dimensions do not match *metric*
        :returns: the instance

        """
        metric = metric.validate()
        profile = Profile.of(agents)
        if isinstance(prediction, (int, float)):
            prediction = [prediction]
        predicted = make_point(prediction)
        for point in profile.points + (predicted,):
            _check_point(metric, point)
        return cls(metric, profile, predicted)

    def with_prediction(self, prediction: Point) -> Instance:
        """Return this instance with another prediction."""
        _check_point(self.metric, prediction)
        return self._replace(prediction=prediction)

    def with_profile(self, profile: Profile) -> Instance:
        """Return this instance with another profile."""
        return self._replace(profile=profile)


class Outcome:
    """A finite probability distribution over facility locations.

    Support points are merged by exact coordinate equality, zero weights are dropped
    and the support is kept sorted, so equal distributions compare equal.

    """

    __slots__ = ("_support",)

    _support: Tuple[Tuple[Point, float], ...]

    def __init__(self, support: Iterable[Tuple[Iterable[float], float]]) -> None:
        """Create the outcome from ``(point, weight)`` pairs.

        :param support: the pairs; duplicate points have their weights added
        :raises InputError: on negative weights, an empty support, mixed dimensions,
            or a total mass that differs from 1 by more than
            :data:`~_spfacility.util.WEIGHT_TOL`

        """
        merged: Dict[Point, float] = {}
        for coords, weight in support:
            point = make_point(coords)
            if not math.isfinite(weight) or weight < 0:
                raise InputError(f"Invalid probability {weight} for {point}")
            if weight == 0:
                continue
            merged[point] = merged.get(point, 0.0) + float(weight)
        if not merged:
            raise InputError("An outcome needs a non-empty support")
        if len({len(point) for point in merged}) != 1:
            raise InputError("All support points need the same dimension")
        total = math.fsum(merged.values())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InputError(f"Outcome probabilities sum to {total}, not 1")
        self._support = tuple(sorted(merged.items()))

    @classmethod
    def point(cls, location: Iterable[float]) -> Outcome:
        """Return the deterministic outcome at *location*."""
        return cls([(location, 1.0)])

    @classmethod
    def mixture(cls, components: Iterable[Tuple[Outcome, float]]) -> Outcome:
        """Return the mixture that draws ``outcome`` with probability ``weight``.

        :param components: ``(outcome, weight)`` pairs with weights summing to 1
        :returns: the merged distribution

        """
        return cls(
            (point, weight * probability)
            for outcome, weight in components
            for point, probability in outcome.support
        )

    @property
    def support(self) -> Tuple[Tuple[Point, float], ...]:
        """The ``(point, weight)`` pairs, sorted by point."""
        return self._support

    @property
    def points(self) -> List[Point]:
        return [point for point, _ in self._support]

    def is_deterministic(self) -> bool:
        return len(self._support) == 1

    def weight_of(self, point: Iterable[float]) -> float:
        """Return the probability of *point*, 0 if it is not in the support."""
        key = tuple(float(c) for c in point)
        return dict(self._support).get(key, 0.0)

    def __iter__(self) -> Iterator[Tuple[Point, float]]:
        return iter(self._support)

    def __len__(self) -> int:
        return len(self._support)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Outcome):
            return NotImplemented
        return self._support == other._support

    def __hash__(self) -> int:
        return hash(self._support)

    def __repr__(self) -> str:
        entries = ", ".join(
            f"{point if len(point) > 1 else point[0]}: {weight}"
            for point, weight in self._support
        )
        return f"Outcome({{{entries}}})"


def distance(metric: MetricSpec, a: Point, b: Point) -> float:
    """Return the distance between *a* and *b* in *metric*.

    :param metric: the space
    :param a: first point
    :param b: second point
    :raises InputError: if a point does not have the dimension of *metric*
    :returns: ``|a - b|`` on the line, ``(|da|^p + |db|^p)^(1/p)`` in the plane

    """
    _check_point(metric, a)
    _check_point(metric, b)
    if metric.is_line:
        return abs(a[0] - b[0])
    return _lp_norm(abs(a[0] - b[0]), abs(a[1] - b[1]), metric.p)  # type: ignore[arg-type]


def _lp_norm(da: float, db: float, p: float) -> float:
    if p == 1:
        return da + db
    if p == 2:
        return math.hypot(da, db)
    largest = max(da, db)
    if largest == 0:
        return 0.0
    # scaled to avoid overflow of large powers
    return largest * ((da / largest) ** p + (db / largest) ** p) ** (1.0 / p)


def distance_array(metric: MetricSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return :func:`distance` for arrays of points, broadcasting their leading axes.

    :param metric: the space
    :param a: points along the last axis
    :param b: points along the last axis
    :returns: the distances, with the last axis removed

    """
    diff = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    if metric.is_line:
        return diff[..., 0]
    da, db = diff[..., 0], diff[..., 1]
    p = float(metric.p)  # type: ignore[arg-type]
    if p == 1:
        return da + db
    if p == 2:
        return np.hypot(da, db)
    largest = np.maximum(da, db)
    scale = np.where(largest == 0, 1.0, largest)
    return largest * ((da / scale) ** p + (db / scale) ** p) ** (1.0 / p)


def max_cost(metric: MetricSpec, profile: Profile, y: Point) -> float:
    """Return the maximum cost ``MC(x, y)`` of placing the facility at *y*.

    :param metric: the space
    :param profile: the agent locations
    :param y: the facility location
    :raises InputError: on an empty profile or mismatched dimensions
    :returns: the largest agent-to-facility distance

    """
    if not profile.points:
        raise InputError("Maximum cost of an empty profile is undefined")
    return max(distance(metric, x, y) for x in profile.points)


def expected_cost(metric: MetricSpec, x: Point, outcome: Outcome) -> float:
    """Return the expected distance from *x* to a facility drawn from *outcome*."""
    return math.fsum(weight * distance(metric, x, y) for y, weight in outcome)


def expected_objective(
    metric: MetricSpec,
    profile: Profile,
    outcome: Outcome,
    mode: ObjectiveMode = ObjectiveMode.EXPECTED_MAX,
) -> float:
    """Return the maximum-cost objective of a randomized *outcome*.

    :param metric: the space
    :param profile: the agent locations
    :param outcome: the facility distribution
    :param mode: :attr:`ObjectiveMode.EXPECTED_MAX` averages the maximum cost over the
        support, :attr:`ObjectiveMode.MAX_OF_EXPECTED` maximises the agents' expected
        costs
    :returns: the objective value; both modes equal :func:`max_cost` on a single point

    """
    if outcome.is_deterministic():
        return max_cost(metric, profile, outcome.points[0])
    if ObjectiveMode(mode) == ObjectiveMode.EXPECTED_MAX:
        return math.fsum(
            weight * max_cost(metric, profile, y) for y, weight in outcome
        )
    return max(expected_cost(metric, x, outcome) for x in profile.points)
