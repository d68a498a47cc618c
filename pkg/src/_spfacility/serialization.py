"""Instance files, sweep tables and JSON mirrors of reports.

Instance files are JSON objects of the form::

    {"metric": {"kind": "l2p", "p": 2.0},
     "agents": [[0.0, 0.0], [1.0, 1.0]],
     "prediction": [0.5, 0.5]}

On the line the metric is ``{"kind": "line"}`` and points are one-element arrays.

"""
from __future__ import annotations

import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Union

import pandas as pd

from _spfacility.analysis import CurvePoint, ProbeResult, RatioReport
from _spfacility.auditor import AuditReport, Deviation
from _spfacility.mechanisms import MechanismSpec
from _spfacility.metric import Instance, MetricKind, MetricSpec, Outcome
from _spfacility.oracles import OracleResult
from _spfacility.util import InputError, InstanceFormatError, read_file

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "mechanism",
    "q",
    "p",
    "eta",
    "worst_ratio",
    "mean_ratio",
    "bound",
    "trials",
    "seed",
]
"""Columns of a sweep table, in order."""


def instance_to_dict(instance: Instance) -> Dict[str, Any]:
    """Return the JSON object of *instance*."""
    metric: Dict[str, Any] = {"kind": instance.metric.kind.value}
    if not instance.metric.is_line:
        metric["p"] = instance.metric.p
    return {
        "metric": metric,
        "agents": [list(point) for point in instance.profile.points],
        "prediction": list(instance.prediction),
    }


def dump_instance(instance: Instance) -> str:
    """Return the canonical text of *instance*.

    Parsing the text and dumping the result again reproduces it byte for byte.

    """
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def _field(data: Dict[str, Any], name: str, source: str) -> Any:
    if name not in data:
        raise InstanceFormatError(source, f"missing field '{name}'")
    return data[name]


def _parse_metric(data: Any, source: str) -> MetricSpec:
    if not isinstance(data, dict):
        raise InstanceFormatError(source, "field 'metric' must be an object")
    kind = _field(data, "kind", source)
    try:
        metric_kind = MetricKind(kind)
    except ValueError as exception:
        raise InstanceFormatError(
            source, f"field 'metric.kind' must be 'line' or 'l2p', got {kind!r}"
        ) from exception
    unknown = set(data) - {"kind", "p"}
    if unknown:
        raise InstanceFormatError(source, f"unknown fields {sorted(unknown)} in 'metric'")
    p = data.get("p")
    if p is not None and (isinstance(p, bool) or not isinstance(p, (int, float))):
        raise InstanceFormatError(source, f"field 'metric.p' must be a number, got {p!r}")
    try:
        return MetricSpec(metric_kind, None if p is None else float(p)).validate()
    except InputError as exception:
        raise InstanceFormatError(source, f"field 'metric': {exception}") from exception


def _parse_point(data: Any, field: str, source: str) -> List[float]:
    if not isinstance(data, list) or not all(
        isinstance(value, (int, float)) and not isinstance(value, bool) for value in data
    ):
        raise InstanceFormatError(
            source, f"field '{field}' must be an array of numbers, got {data!r}"
        )
    return [float(value) for value in data]


def instance_from_dict(data: Any, source: str = "<data>") -> Instance:
    """Return the instance described by the JSON object *data*.

    :param data: the decoded JSON value
    :param source: name of where *data* came from, used in error messages
    :raises InstanceFormatError: if a field is missing, unknown or invalid
    :returns: the validated instance

    """
    if not isinstance(data, dict):
        raise InstanceFormatError(source, "top level must be an object")
    unknown = set(data) - {"metric", "agents", "prediction"}
    if unknown:
        raise InstanceFormatError(source, f"unknown fields {sorted(unknown)}")
    metric = _parse_metric(_field(data, "metric", source), source)
    agents = _field(data, "agents", source)
    if not isinstance(agents, list) or not agents:
        raise InstanceFormatError(source, "field 'agents' must be a non-empty array")
    points = [
        _parse_point(agent, f"agents[{index}]", source)
        for index, agent in enumerate(agents)
    ]
    prediction = _parse_point(_field(data, "prediction", source), "prediction", source)
    try:
        return Instance.create(metric, points, prediction)
    except InputError as exception:
        raise InstanceFormatError(source, str(exception)) from exception


def parse_instance(text: str, source: str = "<string>") -> Instance:
    """Parse the instance file contents *text*.

    :param text: JSON text
    :param source: file name, used in error messages
    :raises InstanceFormatError: on a JSON syntax error, with its line number, or an
        invalid field
    :returns: the instance

    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exception:
        raise InstanceFormatError(source, exception.msg, exception.lineno) from exception
    return instance_from_dict(data, source)


def load_instance(path: Path) -> Instance:
    """Read and parse the instance file *path*.

    :raises InstanceFormatError: if the file is malformed
    :raises OSError: if the file can not be read

    """
    logger.info(f"Reading instance file '{path}'")
    return parse_instance(read_file(path), str(path))


def _number(value: Optional[float]) -> Optional[float]:
    return None if value is None else float(value)


def outcome_to_list(outcome: Outcome) -> List[Dict[str, Any]]:
    return [
        {"location": list(point), "probability": weight} for point, weight in outcome
    ]


def ratio_report_to_dict(
    spec: MechanismSpec, instance: Instance, report: RatioReport
) -> Dict[str, Any]:
    """Return the JSON object of an evaluation of *spec* on *instance*."""
    return {
        "mechanism": spec.id.value,
        "q": spec.q,
        "instance": instance_to_dict(instance),
        "mode": report.mode.value,
        "mechanism_cost": report.mechanism_cost,
        "optimal_cost": report.optimal_cost,
        "ratio": report.ratio,
        "eta": report.eta.eta,
        "bound": _number(report.bound),
        "within_bound": report.within_bound,
    }


def probe_result_to_dict(spec: MechanismSpec, result: ProbeResult) -> Dict[str, Any]:
    return {
        "mechanism": spec.id.value,
        "q": spec.q,
        "worst_prediction": list(result.prediction),
        "worst_ratio": result.report.ratio,
        "eta": result.report.eta.eta,
        "bounds": [list(pair) for pair in result.bounds],
        "step": result.step,
        "cells": result.cells,
    }


def oracle_result_to_dict(result: OracleResult) -> Dict[str, Any]:
    return {
        "location": list(result.location),
        "cost": result.cost,
        "method": result.method.value,
        "tolerance": result.tolerance,
    }


def deviation_to_dict(deviation: Deviation) -> Dict[str, Any]:
    return {
        "coalition": list(deviation.coalition),
        "misreports": [list(point) for point in deviation.misreports],
        "deltas": list(deviation.deltas),
        "note": deviation.note,
    }


def audit_report_to_dict(spec: MechanismSpec, report: AuditReport) -> Dict[str, Any]:
    """Return the JSON object of an audit of *spec*."""
    return {
        "mechanism": spec.id.value,
        "q": spec.q,
        "property": report.property.value,
        "violation_count": report.violation_count,
        "cells_searched": report.cells_searched,
        "complete": report.complete,
        "grid": {
            "bounds": [list(pair) for pair in report.grid.bounds],
            "step": report.grid.step,
            "special": [list(point) for point in report.grid.special],
        },
        "violations": [deviation_to_dict(d) for d in report.violations],
    }


def curve_frame(
    spec: MechanismSpec,
    curve: Sequence[CurvePoint],
    p: Optional[float],
    seed: int,
) -> pd.DataFrame:
    """Return the sweep table of *curve*, one row per curve point.

    :param spec: the mechanism
    :param curve: the curve
    :param p: exponent of the plane, ``None`` on the line
    :param seed: seed of the sweep
    :returns: a frame with the columns :data:`CSV_COLUMNS`

    """
    rows = [
        {
            "mechanism": spec.id.value,
            "q": spec.q,
            "p": p,
            "eta": point.eta,
            "worst_ratio": point.worst_ratio,
            "mean_ratio": point.mean_ratio,
            "bound": point.bound,
            "trials": point.trials,
            "seed": seed,
        }
        for point in curve
    ]
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS)
    for column in ("q", "p", "eta", "worst_ratio", "mean_ratio", "bound"):
        frame[column] = frame[column].astype("float64")
    return frame


def write_csv(frame: pd.DataFrame, target: Union[Path, TextIO, None] = None) -> str:
    """Write *frame* as CSV with a header, ``.`` decimals and LF line endings.

    Missing values become empty cells.

    :param frame: the table
    :param target: a path or an open text stream; ``None`` only returns the text
    :returns: the CSV text

    """
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n", na_rep="")
    text = buffer.getvalue()
    if isinstance(target, Path):
        with open(target, "w", encoding="utf-8", newline="") as file_handle:
            file_handle.write(text)
    elif target is not None:
        target.write(text)
    return text


def dumps_report(data: Any) -> str:
    """Return *data* as indented JSON; infinite ratios are written as ``Infinity``."""
    return json.dumps(data, indent=2, allow_nan=True) + "\n"
