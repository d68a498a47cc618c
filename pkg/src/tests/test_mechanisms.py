"""Unit tests for :mod:`_spfacility.mechanisms`."""
from __future__ import annotations

from random import Random
from typing import Dict, List, Optional, Tuple

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pytest_cases import parametrize, parametrize_with_cases

from _spfacility.mechanisms import (
    MechanismId,
    MechanismSpec,
    line_mechanisms,
    plane_mechanisms,
    run,
    run_batch,
)
from _spfacility.metric import (
    Instance,
    MetricSpec,
    ObjectiveMode,
    Outcome,
    expected_objective,
)
from _spfacility.util import InputError

LINE = MetricSpec.line()


def _line(agents: List[float], prediction: float) -> Instance:
    return Instance.create(LINE, agents, [prediction])


def _plane(agents: List[Tuple[float, float]], prediction: Tuple[float, float]) -> Instance:
    return Instance.create(MetricSpec.plane(2), agents, prediction)


class CasesLine:
    """Line mechanisms on small profiles."""

    @parametrize(
        "agents, prediction, expected",
        [([0.0, 2.0], 1.0, 1.0), ([0.0, 2.0], 3.0, 2.0), ([5.0, 5.0, 5.0], 9.0, 5.0)],
    )
    def case_minmaxp(
        self, agents: List[float], prediction: float, expected: float
    ) -> Tuple[MechanismSpec, Instance, Outcome]:
        return (
            MechanismSpec(MechanismId.MIN_MAX_P),
            _line(agents, prediction),
            Outcome.point((expected,)),
        )

    @parametrize(
        "agents, expected",
        [([0.0, 1.0, 2.0], 1.0), ([0.0, 2.0], 0.0), ([7.0], 7.0), ([3.0, 0.0, 2.0, 1.0], 1.0)],
    )
    def case_median(
        self, agents: List[float], expected: float
    ) -> Tuple[MechanismSpec, Instance, Outcome]:
        return (
            MechanismSpec(MechanismId.MEDIAN),
            _line(agents, 100.0),
            Outcome.point((expected,)),
        )

    def case_lrm(self) -> Tuple[MechanismSpec, Instance, Outcome]:
        return (
            MechanismSpec(MechanismId.LRM),
            _line([0.0, 2.0], 0.0),
            Outcome([((0.0,), 0.25), ((2.0,), 0.25), ((1.0,), 0.5)]),
        )

    def case_lrm_coincident(self) -> Tuple[MechanismSpec, Instance, Outcome]:
        return MechanismSpec(MechanismId.LRM), _line([3.0, 3.0], 0.0), Outcome.point((3.0,))

    @parametrize(
        "prediction, expected",
        [
            (1.0, [((1.0,), 1.0)]),
            (-0.5, [((0.0,), 0.75), ((2.0,), 0.25)]),
            (-3.0, [((0.0,), 0.5), ((2.0,), 0.5)]),
            (2.5, [((2.0,), 0.75), ((0.0,), 0.25)]),
        ],
    )
    def case_rand_line(
        self, prediction: float, expected: list
    ) -> Tuple[MechanismSpec, Instance, Outcome]:
        return (
            MechanismSpec(MechanismId.RAND_LINE_1C2R),
            _line([0.0, 2.0], prediction),
            Outcome(expected),
        )

    def case_rand_line_coincident(self) -> Tuple[MechanismSpec, Instance, Outcome]:
        return (
            MechanismSpec(MechanismId.RAND_LINE_1C2R),
            _line([4.0, 4.0], -1.0),
            Outcome.point((4.0,)),
        )

    def case_mixed_line(self) -> Tuple[MechanismSpec, Instance, Outcome]:
        return (
            MechanismSpec(MechanismId.MIXED_LINE, 0.5),
            _line([0.0, 2.0], 3.0),
            Outcome([((2.0,), 0.625), ((0.0,), 0.125), ((1.0,), 0.25)]),
        )

    def case_mean(self) -> Tuple[MechanismSpec, Instance, Outcome]:
        return MechanismSpec(MechanismId.MEAN), _line([0.0, 1.0, 5.0], 0.0), Outcome.point((2.0,))


class CasesPlane:
    """Planar mechanisms."""

    @parametrize(
        "prediction, expected",
        [((1.0, 1.0), (1.0, 1.0)), ((1.0, 3.0), (1.0, 2.0)), ((-1.0, 3.0), (0.0, 2.0))],
    )
    def case_bounding_box(
        self, prediction: Tuple[float, float], expected: Tuple[float, float]
    ) -> Tuple[MechanismSpec, Instance, Outcome]:
        return (
            MechanismSpec(MechanismId.BOUNDING_BOX),
            _plane([(0.0, 0.0), (2.0, 2.0)], prediction),
            Outcome.point(expected),
        )

    @parametrize(
        "agents, expected",
        [
            ([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], (0.0, 0.0)),
            ([(0.0, 0.0), (0.0, 0.0), (1.0, 1.0)], (0.0, 0.0)),
            ([(0.0, 3.0), (2.0, 1.0), (1.0, 2.0), (3.0, 0.0)], (1.0, 1.0)),
        ],
    )
    def case_coord_median(
        self, agents: List[Tuple[float, float]], expected: Tuple[float, float]
    ) -> Tuple[MechanismSpec, Instance, Outcome]:
        return (
            MechanismSpec(MechanismId.COORD_MEDIAN),
            _plane(agents, (9.0, 9.0)),
            Outcome.point(expected),
        )

    def case_mixed_2d(self) -> Tuple[MechanismSpec, Instance, Outcome]:
        return (
            MechanismSpec(MechanismId.MIXED_2D, 0.25),
            _plane([(0.0, 0.0), (0.0, 0.0), (2.0, 2.0)], (3.0, 1.0)),
            Outcome([((2.0, 1.0), 0.75), ((0.0, 0.0), 0.25)]),
        )


@parametrize_with_cases("spec, instance, expected", cases=[CasesLine, CasesPlane])
def test_run(spec: MechanismSpec, instance: Instance, expected: Outcome) -> None:
    assert run(spec, instance) == expected


@parametrize("q", [0.0, 1.0])
def test_mixed_line_degenerate(q: float) -> None:
    """A mixture with q in {0, 1} behaves like one of its branches."""
    instance = _line([0.0, 1.0, 4.0], 6.0)
    branch = MechanismId.LRM if q == 1 else MechanismId.MIN_MAX_P
    assert run(MechanismSpec(MechanismId.MIXED_LINE, q), instance) == run(
        MechanismSpec(branch), instance
    )


class _CasesInvalidSpec:
    def case_unknown_name(self) -> Tuple[str, Optional[float]]:
        return "Dictator", None

    def case_mixture_without_q(self) -> Tuple[str, Optional[float]]:
        return "MixedLine", None

    @parametrize("q", [-0.1, 1.5])
    def case_q_out_of_range(self, q: float) -> Tuple[str, Optional[float]]:
        return "Mixed2D", q

    def case_q_on_pure_mechanism(self) -> Tuple[str, Optional[float]]:
        return "MinMaxP", 0.5


@pytest.mark.xfail(raises=InputError, strict=True)
@parametrize_with_cases("name, q", cases=_CasesInvalidSpec)
def test_parse_invalid(name: str, q: Optional[float]) -> None:
    MechanismSpec.parse(name, q)


@pytest.mark.xfail(raises=InputError, strict=True)
@parametrize(
    "spec, instance",
    [
        (MechanismSpec(MechanismId.MEDIAN), _plane([(0.0, 0.0)], (0.0, 0.0))),
        (MechanismSpec(MechanismId.COORD_MEDIAN), _line([0.0], 0.0)),
    ],
)
def test_wrong_space(spec: MechanismSpec, instance: Instance) -> None:
    run(spec, instance)


def test_spec_properties() -> None:
    mixed = MechanismSpec.parse("MixedLine", 0.25)
    assert mixed.label == "MixedLine(q=0.25)"
    assert mixed.uses_prediction and not mixed.is_deterministic and not mixed.is_planar
    assert not MechanismSpec(MechanismId.COORD_MEDIAN).uses_prediction
    assert MechanismSpec(MechanismId.BOUNDING_BOX).supports(MetricSpec.plane(1))
    assert not MechanismSpec(MechanismId.BOUNDING_BOX).supports(LINE)


line_values = st.floats(min_value=-100, max_value=100, allow_nan=False)
plane_values = st.tuples(line_values, line_values)


@pytest.mark.parametrize("spec", line_mechanisms + [MechanismSpec(MechanismId.MEAN)])
@given(st.lists(line_values, min_size=1, max_size=7), line_values, st.randoms())
def test_line_anonymous_and_in_range(
    spec: MechanismSpec, agents: List[float], prediction: float, random: Random
) -> None:
    """Permuting the agents does not change the outcome, which stays in [x_1, x_n]."""
    instance = _line(agents, prediction)
    shuffled = list(agents)
    random.shuffle(shuffled)
    outcome = run(spec, instance)
    assert run(spec, _line(shuffled, prediction)) == outcome
    assert all(min(agents) <= y <= max(agents) for (y,), _ in outcome)


@pytest.mark.parametrize("spec", plane_mechanisms)
@given(st.lists(plane_values, min_size=1, max_size=7), plane_values, st.randoms())
def test_plane_anonymous_and_in_range(
    spec: MechanismSpec,
    agents: List[Tuple[float, float]],
    prediction: Tuple[float, float],
    random: Random,
) -> None:
    instance = _plane(agents, prediction)
    shuffled = list(agents)
    random.shuffle(shuffled)
    outcome = run(spec, instance)
    assert run(spec, _plane(shuffled, prediction)) == outcome
    box = instance.profile.bounding_box()
    for point, _ in outcome:
        assert all(lower <= value <= upper for value, (lower, upper) in zip(point, box))


@pytest.mark.parametrize("spec", line_mechanisms + [MechanismSpec(MechanismId.MEAN)])
@given(line_values, st.integers(min_value=1, max_value=6), line_values)
def test_line_unanimous(spec: MechanismSpec, location: float, n: int, prediction: float) -> None:
    assert run(spec, _line([location] * n, prediction)) == Outcome.point((location,))


@pytest.mark.parametrize("spec", plane_mechanisms)
@given(plane_values, st.integers(min_value=1, max_value=6), plane_values)
def test_plane_unanimous(
    spec: MechanismSpec,
    location: Tuple[float, float],
    n: int,
    prediction: Tuple[float, float],
) -> None:
    assert run(spec, _plane([location] * n, prediction)) == Outcome.point(location)


_MIXTURES = [
    (MechanismId.MIXED_LINE, MechanismId.MIN_MAX_P, MechanismId.LRM),
    (MechanismId.MIXED_2D, MechanismId.BOUNDING_BOX, MechanismId.COORD_MEDIAN),
]


@pytest.mark.parametrize("mixture, first, second", _MIXTURES)
@pytest.mark.parametrize("mode", list(ObjectiveMode))
@given(
    st.lists(plane_values, min_size=1, max_size=6),
    plane_values,
    st.floats(min_value=0, max_value=1),
)
def test_mixture_objective_is_linear(
    mixture: MechanismId,
    first: MechanismId,
    second: MechanismId,
    mode: ObjectiveMode,
    agents: List[Tuple[float, float]],
    prediction: Tuple[float, float],
    q: float,
) -> None:
    """The objective of a mixture is the q-weighted sum of its branches' objectives.

    In the plane the worst agent of the two branches can differ, so the maximum of the
    expected costs is only bounded by the weighted sum.

    """
    if mixture == MechanismId.MIXED_LINE:
        instance = _line([a for a, _ in agents], prediction[0])
    else:
        instance = _plane(agents, prediction)

    def objective(spec: MechanismSpec) -> float:
        outcome = run(spec, instance)
        return expected_objective(instance.metric, instance.profile, outcome, mode)

    mixed = objective(MechanismSpec(mixture, q))
    expected = (1 - q) * objective(MechanismSpec(first)) + q * objective(
        MechanismSpec(second)
    )
    if mode == ObjectiveMode.MAX_OF_EXPECTED and mixture == MechanismId.MIXED_2D:
        assert mixed <= expected + 1e-12 * max(1.0, expected)
    else:
        assert mixed == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize(
    "spec",
    [
        MechanismSpec(MechanismId.MEDIAN),
        MechanismSpec(MechanismId.LRM),
        MechanismSpec(MechanismId.COORD_MEDIAN),
    ],
)
@given(st.lists(plane_values, min_size=1, max_size=6), plane_values, plane_values)
def test_prediction_free_mechanisms_ignore_prediction(
    spec: MechanismSpec,
    agents: List[Tuple[float, float]],
    prediction: Tuple[float, float],
    other: Tuple[float, float],
) -> None:
    if spec.is_planar:
        assert run(spec, _plane(agents, prediction)) == run(spec, _plane(agents, other))
    else:
        line_agents = [a for a, _ in agents]
        assert run(spec, _line(line_agents, prediction[0])) == run(
            spec, _line(line_agents, other[0])
        )


@pytest.mark.parametrize("spec", line_mechanisms + plane_mechanisms)
@given(st.lists(plane_values, min_size=1, max_size=6), plane_values)
def test_run_batch_matches_run(
    spec: MechanismSpec, agents: List[Tuple[float, float]], prediction: Tuple[float, float]
) -> None:
    """Each batched component carries the weight the outcome gives its location."""
    if spec.is_planar:
        instance = _plane(agents, prediction)
    else:
        instance = _line([a for a, _ in agents], prediction[0])
    profiles = np.asarray([instance.profile.points], dtype=float)
    components = run_batch(spec, profiles, instance.prediction)
    if not spec.is_batched:
        assert components is None
        return
    outcome = run(spec, instance)
    weights: Dict[Tuple[float, ...], float] = {}
    for locations, weight in components:  # type: ignore[union-attr]
        point = tuple(float(c) for c in locations[0])
        weights[point] = weights.get(point, 0.0) + weight
    assert {point: weight for point, weight in weights.items() if weight > 0} == {
        point: pytest.approx(weight) for point, weight in outcome
    }
