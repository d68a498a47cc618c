"""Unit tests for :mod:`_spfacility.oracles`."""
from __future__ import annotations

import math
from typing import List, Tuple

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pytest_cases import parametrize, parametrize_with_cases

from _spfacility.instances import FamilySpec, fixture_bbox_tight, gen_random
from _spfacility.metric import Instance, MetricSpec, Point, Profile, max_cost
from _spfacility.oracles import (
    Certificate,
    brute_force_center,
    grid_axis,
    optimal,
    optimal_line,
    optimal_lp_ball,
    prediction_error,
)
from _spfacility.util import InputError, SolverError, make_rng
from tests.conftest import TrialCounts


def test_optimal_line() -> None:
    result = optimal_line(Profile.of([4.0, -2.0, 1.0]))
    assert result.location == (1.0,)
    assert result.cost == 3.0
    assert result.method == Certificate.CLOSED_FORM
    assert result.tolerance == 0.0


class CasesLpBall:
    """Profiles with a known smallest enclosing l_p ball."""

    @parametrize("p", [2, 3, 4])
    def case_tight_triangle(self, p: float) -> Tuple[MetricSpec, List[Point], Point, float]:
        instance = fixture_bbox_tight(p, 0.0)
        return instance.metric, list(instance.profile.points), (0.0, 0.0), 1.0

    @parametrize("p", [1, 2, 5])
    def case_segment(self, p: float) -> Tuple[MetricSpec, List[Point], Point, float]:
        return MetricSpec.plane(p), [(0.0, 0.0), (4.0, 0.0)], (2.0, 0.0), 2.0

    def case_square(self) -> Tuple[MetricSpec, List[Point], Point, float]:
        corners = [(0.0, 0.0), (2.0, 0.0), (0.0, 2.0), (2.0, 2.0)]
        return MetricSpec.plane(2), corners, (1.0, 1.0), math.sqrt(2)

    def case_single_agent(self) -> Tuple[MetricSpec, List[Point], Point, float]:
        return MetricSpec.plane(3), [(1.5, -2.0)], (1.5, -2.0), 0.0


@parametrize_with_cases("metric, points, center, radius", cases=CasesLpBall)
def test_optimal_lp_ball(
    metric: MetricSpec, points: List[Point], center: Point, radius: float
) -> None:
    result = optimal_lp_ball(Profile.of(points), metric)
    assert result.method == Certificate.CONVEX_MINIMAX
    assert result.cost == pytest.approx(radius, abs=1e-8)
    assert result.tolerance <= 1e-9
    if metric.p != 1:
        # the l_1 center of a horizontal segment is not unique in b
        assert result.location == pytest.approx(center, abs=1e-6)


@pytest.mark.xfail(raises=SolverError, strict=True)
def test_optimal_lp_ball_iteration_cap() -> None:
    optimal_lp_ball(
        Profile.of([(0.0, 0.0), (1.0, 3.0), (2.0, 1.0)]), MetricSpec.plane(2), 1e-9, 5
    )


@parametrize("offset", [1e3, 1e7, 1e8])
def test_optimal_lp_ball_far_from_origin(offset: float) -> None:
    """Large coordinates only coarsen the tolerance to their float resolution."""
    profile = Profile.of([(offset, offset), (offset + 1, offset), (offset, offset + 1)])
    result = optimal_lp_ball(profile, MetricSpec.plane(2))
    assert result.cost == pytest.approx(math.sqrt(0.5), rel=1e-6)
    assert result.location == pytest.approx((offset + 0.5, offset + 0.5), abs=1e-6)
    assert result.tolerance <= max(1e-9, 32 * float(np.spacing(offset)))


@pytest.mark.xfail(raises=InputError, strict=True)
@parametrize("tol", [0.0, -1e-3])
def test_optimal_lp_ball_bad_tolerance(tol: float) -> None:
    optimal_lp_ball(Profile.of([(0.0, 0.0)]), MetricSpec.plane(2), tol)


@parametrize(
    "lower, upper, step, expected",
    [
        (-2.0, 2.0, 1.0, [-2.0, -1.0, 0.0, 1.0, 2.0]),
        (0.0, 1.0, 0.3, [0.0, 0.3, 0.6, 0.9, 1.0]),
        (-0.1, 0.2, 0.1, [-0.1, 0.0, 0.1, 0.2]),
    ],
)
def test_grid_axis(lower: float, upper: float, step: float, expected: List[float]) -> None:
    """Round values are hit exactly and the upper end is always included."""
    assert grid_axis(lower, upper, step).tolist() == expected


def test_brute_force_line() -> None:
    result = brute_force_center(Profile.of([0.0, 3.0]), MetricSpec.line(), 0.5)
    assert result.location == (1.5,)
    assert result.cost == 1.5
    assert result.method == Certificate.GRID
    assert result.tolerance == 0.5


class _CasesBruteForceInput:
    @pytest.mark.xfail(raises=InputError, strict=True)
    def case_bounds_miss_agent(self) -> Tuple[float, list, int]:
        return 0.1, [(0.5, 2.0), (0.0, 1.0)], 10_000_000

    @pytest.mark.xfail(raises=InputError, strict=True)
    def case_over_budget(self) -> Tuple[float, list, int]:
        return 0.001, [(0.0, 1.0), (0.0, 1.0)], 1000

    @pytest.mark.xfail(raises=InputError, strict=True)
    def case_zero_step(self) -> Tuple[float, list, int]:
        return 0.0, [(0.0, 1.0), (0.0, 1.0)], 10_000_000

    def case_wider_bounds(self) -> Tuple[float, list, int]:
        return 0.25, [(-1.0, 2.0), (-1.0, 2.0)], 10_000_000


@parametrize_with_cases("step, bounds, budget", cases=_CasesBruteForceInput)
def test_brute_force_input(step: float, bounds: list, budget: int) -> None:
    profile = Profile.of([(0.0, 0.0), (1.0, 1.0)])
    result = brute_force_center(profile, MetricSpec.plane(2), step, bounds, budget)
    assert result.location == (0.5, 0.5)


@parametrize("p", [1, 2, 3, 4])
def test_oracles_agree(p: float, seed: int, trials: TrialCounts) -> None:
    """The convex solver and the grid oracle agree within the grid's tolerance."""
    family = FamilySpec(MetricSpec.plane(p), 8, ((0.0, 1.0), (0.0, 1.0)), seed=seed)
    step = 0.01
    for trial in range(trials(200)):
        instance = gen_random(family._replace(n=2 + trial % 7), cell=(trial,))
        convex = optimal(instance.metric, instance.profile)
        grid = brute_force_center(instance.profile, instance.metric, step)
        assert grid.cost >= convex.cost - 1e-9
        assert grid.cost - convex.cost <= step * 2 ** (1 / p) + 1e-6


def test_optimal_is_memoised(cold_oracle: None) -> None:
    profile = Profile.of([(0.0, 0.0), (1.0, 2.0)])
    first = optimal(MetricSpec.plane(2), profile)
    assert optimal(MetricSpec.plane(2), profile) is first
    assert optimal(MetricSpec.plane(3), profile) is not first


class CasesPredictionError:
    """Test cases for :func:`.test_prediction_error`."""

    def case_exact(self) -> Tuple[Instance, float]:
        return Instance.create(MetricSpec.line(), [0.0, 2.0], [1.0]), 0.0

    def case_half(self) -> Tuple[Instance, float]:
        return Instance.create(MetricSpec.line(), [0.0, 4.0], [1.0]), 0.5

    def case_zero_cost_exact(self) -> Tuple[Instance, float]:
        return Instance.create(MetricSpec.line(), [3.0, 3.0], [3.0]), 0.0

    def case_zero_cost_wrong(self) -> Tuple[Instance, float]:
        return Instance.create(MetricSpec.line(), [3.0, 3.0], [4.0]), math.inf

    @parametrize("eta", [0.5, 1.0, 2.0])
    def case_plane(self, eta: float) -> Tuple[Instance, float]:
        return fixture_bbox_tight(2.0, eta), eta


@parametrize_with_cases("instance, expected", cases=CasesPredictionError)
def test_prediction_error(instance: Instance, expected: float) -> None:
    assert prediction_error(instance).eta == pytest.approx(expected, abs=1e-8)


coordinates = st.floats(min_value=-100, max_value=100, allow_nan=False)


@given(st.lists(coordinates, min_size=1, max_size=7))
def test_collinear_embedding_matches_line(values: List[float]) -> None:
    """Agents on the a-axis of the Euclidean plane have the optimum of the line."""
    line = optimal_line(Profile.of(values))
    embedded = Profile.of((value, 0.0) for value in values)
    plane = optimal_lp_ball(embedded, MetricSpec.plane(2))
    assert plane.cost == pytest.approx(line.cost, abs=1e-6)


@parametrize("p", [1, 2, 3])
def test_no_point_beats_the_optimum(p: float, seed: int, trials: TrialCounts) -> None:
    """Random locations never have a smaller maximum cost than the solver's optimum."""
    family = FamilySpec(MetricSpec.plane(p), 6, ((0.0, 1.0), (0.0, 1.0)), seed=seed)
    for trial in range(trials(50)):
        instance = gen_random(family, namespace="certificate", cell=(trial,))
        result = optimal(instance.metric, instance.profile)
        rng = make_rng(seed, "certificate", trial)
        for location in rng.uniform(-0.5, 1.5, size=(100, 2)):
            cost = max_cost(instance.metric, instance.profile, tuple(map(float, location)))
            assert cost >= result.cost - result.tolerance


@given(
    st.lists(coordinates, min_size=2, max_size=7).filter(
        lambda xs: max(xs) - min(xs) > 1e-6
    ),
    coordinates,
)
def test_line_prediction_error_is_piecewise_linear(
    values: List[float], prediction: float
) -> None:
    low, high = min(values), max(values)
    middle = (low + high) / 2
    instance = Instance.create(MetricSpec.line(), values, [middle])
    assert prediction_error(instance).eta == 0.0
    eta = prediction_error(instance.with_prediction((prediction,))).eta
    assert eta == pytest.approx(abs(prediction - middle) / ((high - low) / 2), rel=1e-9)
