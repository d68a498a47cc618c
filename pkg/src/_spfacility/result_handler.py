"""Result handlers for evaluation, sweep, audit, probe and oracle results.

Provides result handlers that write results into some output stream, like stdout.

"""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import List, Sequence, TextIO, Union

import click

from _spfacility.adversary import LowerBoundProbe, MovingStep
from _spfacility.analysis import CurvePoint, ProbeResult, RatioReport
from _spfacility.auditor import AuditReport
from _spfacility.oracles import OracleResult

Result = Union[
    RatioReport,
    AuditReport,
    OracleResult,
    ProbeResult,
    LowerBoundProbe,
    Sequence[CurvePoint],
    Sequence[MovingStep],
]
"""Type alias for everything a result handler accepts."""


class AbstractResultHandler(ABC):
    """Result handler that is agnostic as to how the handled entries are formatted.

    Subclasses must implement :meth:`~.AbstractResultHandler._format_result` so that
    entries are formatted, or inherit from a class that already provides such a
    formatter.

    Output streams can be added to the result handler by calling
    :meth:`~.AbstractResultHandler.add_stream`.

    """

    _streams: List[TextIO]
    """The streams that this result handler outputs to."""

    def __init__(self) -> None:
        """Instantiate the result handler."""
        self._streams = []

    def handle_result(self, title: str, result: Result) -> None:
        """Pass *result* to the underlying output streams.

        :param title: what was computed, e.g. the mechanism and the instance source
        :param result: the result

        """
        for handler in self._streams:
            handler.write(self._format_result(title, result))

    @abstractmethod
    def _format_result(self, title: str, result: Result) -> str:
        """Format *result*.

        :param title: what was computed
        :param result: the result

        """
        pass

    def add_stream(self, stream: TextIO) -> None:
        """Append `stream` to the streams that this result handler outputs to.

        :param stream: the stream

        """
        self._streams.append(stream)


def _value(value: Union[float, None]) -> str:
    return "-" if value is None else f"{value:.6g}"


class HumanReadableStringResultHandler(AbstractResultHandler):
    """Formats values in relatively verbose human-readable strings.

    Suited for output in a console terminal.

    """

    def _format_result(self, title: str, result: Result) -> str:
        ret = [f"{title}\n"]
        if isinstance(result, RatioReport):
            ret.append(self._format_ratio(result))
        elif isinstance(result, AuditReport):
            ret.append(self._format_audit(result))
        elif isinstance(result, OracleResult):
            ret.append(
                f"\tcenter: {result.location}\n\tradius: {result.cost:.9g}\n"
                f"\tcertificate: {result.method.value} "
                f"(tolerance {result.tolerance:.3g})\n"
            )
        elif isinstance(result, ProbeResult):
            box = " x ".join(f"[{lo:g}, {hi:g}]" for lo, hi in result.bounds)
            ret.append(
                f"\tworst prediction: {result.prediction}\n"
                f"{self._format_ratio(result.report)}"
                f"\tsearched: {result.cells} predictions on {box}, step "
                f"{result.step:g}\n"
            )
        elif isinstance(result, LowerBoundProbe):
            ret.append(
                f"\tratio on (0, 2): {_value(result.ratios[0])}\n"
                f"\tratio on (0, 4): {_value(result.ratios[1])}\n"
                f"\tworst: {_value(result.worst)}\n"
            )
        else:
            ret.append(self._format_rows(result))
        return "".join(ret)

    @staticmethod
    def _format_ratio(report: RatioReport) -> str:
        if report.bound is None:
            verdict = "no proven bound"
        else:
            verdict = "PASS" if report.within_bound else "FAIL"
        return (
            f"\tmechanism cost: {_value(report.mechanism_cost)} ({report.mode.value})\n"
            f"\toptimal cost: {_value(report.optimal_cost)}\n"
            f"\tprediction error: {_value(report.eta.eta)}\n"
            f"\tratio: {_value(report.ratio)}, bound: {_value(report.bound)}, "
            f"{verdict}\n"
        )

    @staticmethod
    def _format_audit(report: AuditReport) -> str:
        ret = [
            f"\t{report.property.value}: "
            f"{'clean' if report.clean else f'{report.violation_count} violation(s)'}"
            f"{'' if report.complete else ', search incomplete'}\n",
            f"\tsearched {report.cells_searched} deviations on {report.grid}\n",
        ]
        for deviation in report.violations:
            ret.append(
                f"\tagents {list(deviation.coalition)} report "
                f"{list(deviation.misreports)}: gains "
                f"{[round(delta, 9) for delta in deviation.deltas]}"
                f"{f' ({deviation.note})' if deviation.note else ''}\n"
            )
        return "".join(ret)

    @staticmethod
    def _format_rows(rows: Union[Sequence[CurvePoint], Sequence[MovingStep]]) -> str:
        ret = []
        for row in rows:
            if isinstance(row, CurvePoint):
                ret.append(
                    f"\teta {row.eta:<8g} worst {_value(row.worst_ratio):<10} "
                    f"mean {_value(row.mean_ratio):<10} bound {_value(row.bound):<10} "
                    f"trials {row.trials}\n"
                )
            else:
                ret.append(
                    f"\tstep {row.step:<4} x3 {row.rightmost:<6g} ratio "
                    f"{_value(row.ratio):<10} support {row.side.value}\n"
                )
        return "".join(ret)


class ClickResultHandler(HumanReadableStringResultHandler):
    """Handle results using :func:`click.echo`."""

    def handle_result(self, title: str, result: Result) -> None:
        """Write result to standard output using :func:`click.echo`."""
        click.echo(self._format_result(title, result))

    def add_stream(self, stream: TextIO) -> None:
        """Not implemented for this result handler.

        :param stream: the stream to be added
        :raises NotImplementedError: when called

        """
        raise NotImplementedError
