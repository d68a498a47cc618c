"""Unit tests for :mod:`_spfacility.metric`."""
from __future__ import annotations

import math
from typing import Tuple

import pytest
from hypothesis import given
from hypothesis import strategies as st
from pytest_cases import parametrize, parametrize_with_cases

from _spfacility.metric import (
    Instance,
    MetricKind,
    MetricSpec,
    ObjectiveMode,
    Outcome,
    Point,
    Profile,
    distance,
    expected_objective,
    max_cost,
)
from _spfacility.util import InputError

coordinates = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
plane_points = st.tuples(coordinates, coordinates)
exponents = st.floats(min_value=1.0, max_value=8.0)


class CasesDistance:
    """Test cases for :func:`.test_distance`."""

    def case_line(self) -> Tuple[MetricSpec, Point, Point, float]:
        return MetricSpec.line(), (-1.5,), (2.0,), 3.5

    @parametrize("p, expected", [(1, 7.0), (2, 5.0), (3, 91 ** (1 / 3))])
    def case_plane(self, p: float, expected: float) -> Tuple[MetricSpec, Point, Point, float]:
        return MetricSpec.plane(p), (0.0, 0.0), (3.0, 4.0), expected

    @pytest.mark.xfail(raises=InputError, strict=True)
    def case_dimension_mismatch(self) -> Tuple[MetricSpec, Point, Point, float]:
        return MetricSpec.line(), (0.0, 0.0), (1.0,), 0.0


@parametrize_with_cases("metric, a, b, expected", cases=CasesDistance)
def test_distance(metric: MetricSpec, a: Point, b: Point, expected: float) -> None:
    assert distance(metric, a, b) == pytest.approx(expected, rel=1e-12)


@given(plane_points, plane_points, plane_points, exponents)
def test_lp_distance_is_a_metric(a: Point, b: Point, c: Point, p: float) -> None:
    """Symmetry and the triangle inequality hold for every exponent."""
    metric = MetricSpec.plane(p)
    assert distance(metric, a, b) == distance(metric, b, a)
    assert distance(metric, a, a) == 0
    assert distance(metric, a, c) <= distance(metric, a, b) + distance(
        metric, b, c
    ) + 1e-9 * (1 + distance(metric, a, c))


class _CasesInvalidMetric:
    def case_line_with_p(self) -> MetricSpec:
        return MetricSpec(MetricKind.LINE, 2.0)

    def case_plane_without_p(self) -> MetricSpec:
        return MetricSpec(MetricKind.PLANE)

    @parametrize("p", [0.5, math.inf, math.nan])
    def case_plane_bad_p(self, p: float) -> MetricSpec:
        return MetricSpec(MetricKind.PLANE, p)


@pytest.mark.xfail(raises=InputError, strict=True)
@parametrize_with_cases("metric", cases=_CasesInvalidMetric)
def test_invalid_metric(metric: MetricSpec) -> None:
    metric.validate()


def test_profile_views() -> None:
    profile = Profile.of([3.0, -1.0, 2.0])
    assert profile.n == 3
    assert profile.sorted_view() == [-1.0, 2.0, 3.0]
    assert profile.extremes() == (-1.0, 3.0)
    assert profile.diameter(MetricSpec.line()) == 4.0
    assert not profile.is_coincident()
    assert profile.replace((0,), ((-1.0,),)).points == ((-1.0,), (-1.0,), (2.0,))


@pytest.mark.xfail(raises=InputError, strict=True)
@parametrize("points", [[], [(0.0,), (0.0, 1.0)], [(math.nan,)]])
def test_invalid_profile(points: list) -> None:
    Profile.of(points)


@pytest.mark.xfail(raises=InputError, strict=True)
def test_instance_dimension_mismatch() -> None:
    Instance.create(MetricSpec.plane(2), [(0.0, 0.0)], [1.0])


def test_outcome_merges_duplicates() -> None:
    outcome = Outcome([((1.0,), 0.25), ((0.0,), 0.5), ((1.0,), 0.25)])
    assert outcome.support == (((0.0,), 0.5), ((1.0,), 0.5))
    assert outcome.weight_of((1.0,)) == 0.5
    assert outcome.weight_of((2.0,)) == 0.0
    assert not outcome.is_deterministic()
    assert Outcome.point((3.0,)) == Outcome([((3.0,), 0.75), ((3.0,), 0.25)])


@pytest.mark.xfail(raises=InputError, strict=True)
@parametrize(
    "support",
    [[((0.0,), 0.5)], [((0.0,), -0.5), ((1.0,), 1.5)], [], [((0.0,), 0.0)]],
)
def test_invalid_outcome(support: list) -> None:
    Outcome(support)


def test_outcome_mixture() -> None:
    mixture = Outcome.mixture(
        [
            (Outcome.point((2.0,)), 0.5),
            (Outcome([((0.0,), 0.25), ((2.0,), 0.25), ((1.0,), 0.5)]), 0.5),
        ]
    )
    assert mixture.support == (((0.0,), 0.125), ((1.0,), 0.25), ((2.0,), 0.625))


class CasesObjective:
    """Randomized outcomes on the profile (0, 2)."""

    def case_lrm_expected_max(self) -> Tuple[Outcome, ObjectiveMode, float]:
        lrm = Outcome([((0.0,), 0.25), ((2.0,), 0.25), ((1.0,), 0.5)])
        return lrm, ObjectiveMode.EXPECTED_MAX, 1.5

    def case_lrm_max_of_expected(self) -> Tuple[Outcome, ObjectiveMode, float]:
        lrm = Outcome([((0.0,), 0.25), ((2.0,), 0.25), ((1.0,), 0.5)])
        return lrm, ObjectiveMode.MAX_OF_EXPECTED, 1.0

    @parametrize("mode", list(ObjectiveMode))
    def case_deterministic(self, mode: ObjectiveMode) -> Tuple[Outcome, ObjectiveMode, float]:
        return Outcome.point((0.5,)), mode, 1.5


@parametrize_with_cases("outcome, mode, expected", cases=CasesObjective)
def test_expected_objective(outcome: Outcome, mode: ObjectiveMode, expected: float) -> None:
    profile = Profile.of([0.0, 2.0])
    assert expected_objective(MetricSpec.line(), profile, outcome, mode) == expected


@given(st.lists(plane_points, min_size=1, max_size=6), plane_points, exponents)
def test_expected_max_dominates_max_of_expected(
    points: list, y: Point, p: float
) -> None:
    """Expectation of the maximum is never below the maximum of expectations."""
    metric = MetricSpec.plane(p)
    profile = Profile.of(points)
    outcome = Outcome([(y, 0.5), ((0.0, 0.0), 0.5)])
    assert expected_objective(
        metric, profile, outcome, ObjectiveMode.EXPECTED_MAX
    ) >= expected_objective(
        metric, profile, outcome, ObjectiveMode.MAX_OF_EXPECTED
    ) - 1e-9 * (1 + max_cost(metric, profile, y))
