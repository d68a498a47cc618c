"""Facility location mechanisms as pure maps from (profile, prediction) to an outcome.

Line mechanisms read the first coordinate of one-dimensional points; planar
mechanisms work coordinate by coordinate. Randomized mechanisms return their
distribution explicitly and never sample.

"""
from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from _spfacility.metric import Instance, MetricSpec, Outcome, Point, Profile
from _spfacility.util import InputError

logger = logging.getLogger(__name__)


class MechanismId(str, Enum):
    """Names under which mechanisms are addressed by the CLI and configuration."""

    MIN_MAX_P = "MinMaxP"
    MEDIAN = "Median"
    LRM = "LRM"
    MIXED_LINE = "MixedLine"
    RAND_LINE_1C2R = "RandLine1C2R"
    BOUNDING_BOX = "BoundingBox"
    COORD_MEDIAN = "CoordMedian"
    MIXED_2D = "Mixed2D"
    MEAN = "Mean"
    """average of the reports; not strategyproof, kept as a negative control"""


_MIXTURES = {MechanismId.MIXED_LINE, MechanismId.MIXED_2D}
_PLANAR = {MechanismId.BOUNDING_BOX, MechanismId.COORD_MEDIAN, MechanismId.MIXED_2D}
_PREDICTION_FREE = {
    MechanismId.MEDIAN,
    MechanismId.LRM,
    MechanismId.COORD_MEDIAN,
    MechanismId.MEAN,
}
_DETERMINISTIC = {
    MechanismId.MIN_MAX_P,
    MechanismId.MEDIAN,
    MechanismId.BOUNDING_BOX,
    MechanismId.COORD_MEDIAN,
    MechanismId.MEAN,
}


class MechanismSpec(NamedTuple):
    """A mechanism together with its mixing probability."""

    id: MechanismId
    q: Optional[float] = None
    """probability of the prediction-free branch, only for mixtures"""

    @classmethod
    def parse(cls, name: str, q: Optional[float] = None) -> MechanismSpec:
        """Create a validated spec from the mechanism's *name*.

        :param name: one of the values of :class:`MechanismId`
        :param q: mixing probability, required for mixtures
        :raises InputError: on an unknown name or an invalid *q*
        :returns: the parsed mechanism

        """
        try:
            mechanism_id = MechanismId(name)
        except ValueError as exception:
            known = ", ".join(item.value for item in MechanismId)
            raise InputError(
                f"Unknown mechanism '{name}', choose one of {known}"
            ) from exception
        return cls(mechanism_id, q).validate()

    def validate(self) -> MechanismSpec:
        """Return this spec if ``q`` is present exactly for mixtures and lies in [0, 1].

        :raises InputError: otherwise
        :returns: the same object

        """
        if self.id in _MIXTURES:
            if self.q is None or not 0 <= self.q <= 1:
                raise InputError(f"{self.id.value} needs q in [0, 1], got {self.q}")
        elif self.q is not None:
            raise InputError(f"{self.id.value} does not take a mixing probability")
        return self

    @property
    def is_planar(self) -> bool:
        return self.id in _PLANAR

    @property
    def uses_prediction(self) -> bool:
        return self.id not in _PREDICTION_FREE

    @property
    def is_deterministic(self) -> bool:
        return self.id in _DETERMINISTIC

    @property
    def is_batched(self) -> bool:
        """Whether :func:`run_batch` evaluates this mechanism."""
        return self.id in _batch_dispatch

    def supports(self, metric: MetricSpec) -> bool:
        """Return whether this mechanism is defined on *metric*."""
        return self.is_planar != metric.is_line

    @property
    def label(self) -> str:
        """Name, with the mixing probability for mixtures."""
        return self.id.value if self.q is None else f"{self.id.value}(q={self.q:g})"


def _left_median(values: list) -> float:
    ordered = sorted(values)
    return ordered[(len(ordered) + 1) // 2 - 1]


def _clamp(value: float, lower: float, upper: float) -> float:
    return max(lower, min(upper, value))


def minmaxp(profile: Profile, prediction: Point) -> Outcome:
    """Return the prediction clamped to ``[x_1, x_n]``."""
    lowest, highest = profile.extremes()
    return Outcome.point((_clamp(prediction[0], lowest, highest),))


def median_line(profile: Profile) -> Outcome:
    """Return the left median, the ``ceil(n/2)``-th smallest report."""
    return Outcome.point((_left_median(profile.coordinate(0)),))


def lrm(profile: Profile) -> Outcome:
    """Return ``x_1``, ``x_n`` and their midpoint with probabilities 1/4, 1/4, 1/2."""
    lowest, highest = profile.extremes()
    return Outcome(
        [
            ((lowest,), 0.25),
            ((highest,), 0.25),
            (((lowest + highest) / 2,), 0.5),
        ]
    )


def rand_line_1c2r(profile: Profile, prediction: Point) -> Outcome:
    """Return the randomized 1-consistent and 2-robust line mechanism's outcome.

    A prediction inside ``[x_1, x_n]`` is returned as is. Outside, the nearer extreme
    gets probability ``max(1/2, 1 - t)`` and the farther one ``min(1/2, t)``, where
    ``t`` is the prediction's distance to the nearer extreme relative to
    ``x_n - x_1``.

    This mechanism is not strategyproof: an interior agent can report a new extreme
    between the prediction and the old one and shift weight towards itself.

    """
    lowest, highest = profile.extremes()
    if lowest == highest:
        return Outcome.point((lowest,))
    target = prediction[0]
    if lowest <= target <= highest:
        return Outcome.point((target,))
    span = highest - lowest
    if target < lowest:
        near, far, t = lowest, highest, (lowest - target) / span
    else:
        near, far, t = highest, lowest, (target - highest) / span
    return Outcome([((near,), max(0.5, 1 - t)), ((far,), min(0.5, t))])


def mixed_line(profile: Profile, prediction: Point, q: float) -> Outcome:
    """Run :func:`minmaxp` with probability ``1 - q`` and :func:`lrm` with ``q``."""
    return Outcome.mixture(
        [(minmaxp(profile, prediction), 1 - q), (lrm(profile), q)]
    )


def mean_line(profile: Profile) -> Outcome:
    """Return the average report."""
    values = profile.coordinate(0)
    lowest, highest = min(values), max(values)
    # rounding could otherwise step outside a coincident profile
    return Outcome.point((_clamp(math.fsum(values) / len(values), lowest, highest),))


def bounding_box(profile: Profile, prediction: Point) -> Outcome:
    """Return the prediction clamped coordinate-wise into the agents' bounding box."""
    return Outcome.point(
        tuple(
            _clamp(target, lower, upper)
            for target, (lower, upper) in zip(prediction, profile.bounding_box())
        )
    )


def coord_median(profile: Profile) -> Outcome:
    """Return the left median of every coordinate."""
    return Outcome.point(
        tuple(_left_median(profile.coordinate(axis)) for axis in range(2))
    )


def mixed_2d(profile: Profile, prediction: Point, q: float) -> Outcome:
    """Run :func:`bounding_box` with probability ``1 - q`` and :func:`coord_median`
    with ``q``."""
    return Outcome.mixture(
        [(bounding_box(profile, prediction), 1 - q), (coord_median(profile), q)]
    )


_dispatch: Dict[MechanismId, Callable[[MechanismSpec, Profile, Point], Outcome]] = {
    MechanismId.MIN_MAX_P: lambda spec, x, pi: minmaxp(x, pi),
    MechanismId.MEDIAN: lambda spec, x, pi: median_line(x),
    MechanismId.LRM: lambda spec, x, pi: lrm(x),
    MechanismId.MIXED_LINE: lambda spec, x, pi: mixed_line(x, pi, spec.q),  # type: ignore[arg-type]
    MechanismId.RAND_LINE_1C2R: lambda spec, x, pi: rand_line_1c2r(x, pi),
    MechanismId.BOUNDING_BOX: lambda spec, x, pi: bounding_box(x, pi),
    MechanismId.COORD_MEDIAN: lambda spec, x, pi: coord_median(x),
    MechanismId.MIXED_2D: lambda spec, x, pi: mixed_2d(x, pi, spec.q),  # type: ignore[arg-type]
    MechanismId.MEAN: lambda spec, x, pi: mean_line(x),
}


def run(spec: MechanismSpec, instance: Instance) -> Outcome:
    """Return the outcome of mechanism *spec* on *instance*.

    :param spec: the mechanism
    :param instance: profile and prediction
    :raises InputError: if the mechanism is not defined on the instance's space, or
        *spec* is invalid
    :returns: the outcome distribution

    """
    spec = spec.validate()
    if not spec.supports(instance.metric):
        raise InputError(
            f"Mechanism {spec.label} is not defined on metric {instance.metric}"
        )
    return _dispatch[spec.id](spec, instance.profile, instance.prediction)


Component = Tuple[np.ndarray, float]
"""Facility locations of shape ``(m, d)`` for a stack of profiles, and their weight."""


def _left_median_array(values: np.ndarray) -> np.ndarray:
    return np.sort(values, axis=1)[:, (values.shape[1] + 1) // 2 - 1]


def _lrm_batch(profiles: np.ndarray) -> List[Component]:
    lowest = profiles[:, :, 0].min(axis=1)
    highest = profiles[:, :, 0].max(axis=1)
    return [
        (lowest[:, None], 0.25),
        (highest[:, None], 0.25),
        (((lowest + highest) / 2)[:, None], 0.5),
    ]


def _minmaxp_batch(profiles: np.ndarray, prediction: Point) -> List[Component]:
    lowest = profiles[:, :, 0].min(axis=1)
    highest = profiles[:, :, 0].max(axis=1)
    located = np.maximum(lowest, np.minimum(highest, prediction[0]))
    return [(located[:, None], 1.0)]


def _bounding_box_batch(profiles: np.ndarray, prediction: Point) -> List[Component]:
    target = np.asarray(prediction, dtype=float)
    located = np.maximum(profiles.min(axis=1), np.minimum(profiles.max(axis=1), target))
    return [(located, 1.0)]


def _mix(
    first: List[Component], second: List[Component], q: float
) -> List[Component]:
    return [(locations, weight * (1 - q)) for locations, weight in first] + [
        (locations, weight * q) for locations, weight in second
    ]


_batch_dispatch: Dict[
    MechanismId, Callable[[MechanismSpec, np.ndarray, Point], List[Component]]
] = {
    MechanismId.MIN_MAX_P: lambda spec, xs, pi: _minmaxp_batch(xs, pi),
    MechanismId.MEDIAN: lambda spec, xs, pi: [
        (_left_median_array(xs[:, :, 0])[:, None], 1.0)
    ],
    MechanismId.LRM: lambda spec, xs, pi: _lrm_batch(xs),
    MechanismId.MIXED_LINE: lambda spec, xs, pi: _mix(
        _minmaxp_batch(xs, pi), _lrm_batch(xs), spec.q  # type: ignore[arg-type]
    ),
    MechanismId.BOUNDING_BOX: lambda spec, xs, pi: _bounding_box_batch(xs, pi),
    MechanismId.COORD_MEDIAN: lambda spec, xs, pi: [(_left_median_array(xs), 1.0)],
    MechanismId.MIXED_2D: lambda spec, xs, pi: _mix(
        _bounding_box_batch(xs, pi),
        [(_left_median_array(xs), 1.0)],
        spec.q,  # type: ignore[arg-type]
    ),
}


def run_batch(
    spec: MechanismSpec, profiles: np.ndarray, prediction: Point
) -> Optional[List[Component]]:
    """Return the outcomes of mechanism *spec* on a stack of profiles at once.

    Only mechanisms whose support weights do not depend on the profile have a batched
    form. Each returned component holds the ``m`` locations of one support entry;
    entries are not merged, so the expected cost of an agent is the weighted sum over
    all components.

    :param spec: a validated mechanism that supports the profiles' space
    :param profiles: array of shape ``(m, n, d)``, one profile per row
    :param prediction: the prediction shared by all profiles
    :returns: the support components, or ``None`` without a batched form

    """
    batch = _batch_dispatch.get(spec.id)
    if batch is None:
        return None
    return batch(spec, np.asarray(profiles, dtype=float), prediction)


line_mechanisms = [
    MechanismSpec(MechanismId.MIN_MAX_P),
    MechanismSpec(MechanismId.MEDIAN),
    MechanismSpec(MechanismId.LRM),
    MechanismSpec(MechanismId.RAND_LINE_1C2R),
    MechanismSpec(MechanismId.MIXED_LINE, 0.5),
]
"""Line mechanisms with a proven bound, in their default configuration."""

plane_mechanisms = [
    MechanismSpec(MechanismId.BOUNDING_BOX),
    MechanismSpec(MechanismId.COORD_MEDIAN),
    MechanismSpec(MechanismId.MIXED_2D, 0.5),
]
"""Planar mechanisms with a proven bound, in their default configuration."""
