"""Unit tests for :mod:`_spfacility.result_handler`."""
from __future__ import annotations

import io

import pytest
from pytest_cases import parametrize

from _spfacility.adversary import randomized_lower_bound_probe
from _spfacility.analysis import CurvePoint, approx_ratio
from _spfacility.auditor import AuditConfig, audit_sp
from _spfacility.instances import fixture_minmaxp_tight
from _spfacility.mechanisms import MechanismId, MechanismSpec
from _spfacility.metric import Instance, MetricSpec, ObjectiveMode
from _spfacility.result_handler import (
    ClickResultHandler,
    HumanReadableStringResultHandler,
)


def _handle(title: str, result: object) -> str:
    stream = io.StringIO()
    handler = HumanReadableStringResultHandler()
    handler.add_stream(stream)
    handler.handle_result(title, result)  # type: ignore[arg-type]
    return stream.getvalue()


@parametrize(
    "mechanism, verdict",
    [
        (MechanismId.MIN_MAX_P, "ratio: 1.5, bound: 1.5, PASS"),
        (MechanismId.MEAN, "ratio: 1, bound: -, no proven bound"),
    ],
)
def test_ratio_verdict(mechanism: MechanismId, verdict: str) -> None:
    instance = fixture_minmaxp_tight(0.5)
    text = _handle("title", approx_ratio(MechanismSpec(mechanism), instance))
    assert text.startswith("title\n")
    assert verdict in text


def test_ratio_failure() -> None:
    report = approx_ratio(
        MechanismSpec(MechanismId.MIN_MAX_P), fixture_minmaxp_tight(0.5)
    )._replace(bound=1.2)
    assert "FAIL" in _handle("t", report)


def test_audit_lines() -> None:
    instance = Instance.create(MetricSpec.line(), [0.0, 2.0], [1.0])
    report = audit_sp(
        MechanismSpec(MechanismId.MEAN), instance, config=AuditConfig(max_witnesses=1)
    )
    text = _handle("Mean", report)
    assert f"SP: {report.violation_count} violation(s)" in text
    assert "agents [0] report [(-2.0,)]: gains [1.0]" in text


def test_curve_and_probe_rows() -> None:
    text = _handle("sweep", [CurvePoint(0.5, None, None, 1.5, 0)])
    assert "eta 0.5" in text and "worst -" in text and "trials 0" in text
    probe = randomized_lower_bound_probe(
        MechanismSpec(MechanismId.MIN_MAX_P), ObjectiveMode.EXPECTED_MAX
    )
    assert "worst: 1.5" in _handle("probe", probe)


def test_multiple_streams() -> None:
    first, second = io.StringIO(), io.StringIO()
    handler = HumanReadableStringResultHandler()
    handler.add_stream(first)
    handler.add_stream(second)
    handler.handle_result("t", [CurvePoint(0.0, 1.0, 1.0, 1.0, 1)])
    assert first.getvalue() == second.getvalue() != ""


@pytest.mark.xfail(raises=NotImplementedError, strict=True)
def test_click_handler_rejects_streams() -> None:
    ClickResultHandler().add_stream(io.StringIO())
