"""Command line interface."""
from __future__ import annotations

import configparser
import logging
import sys
from functools import wraps
from importlib.metadata import metadata, version
from pathlib import Path
from typing import (
    Any,
    Callable,
    Dict,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    TypeVar,
)

import click
import numpy as np

from _spfacility import configure_logger
from _spfacility.adversary import (
    bbox_tightness_curve,
    minmaxp_tightness_curve,
    randomized_lower_bound_probe,
    sgsp_moving_probe,
)
from _spfacility.analysis import (
    BOUND_TOL,
    approx_ratio,
    gamma_sweep,
    robustness_probe,
)
from _spfacility.auditor import (
    AuditConfig,
    AuditReport,
    DeviationGrid,
    audit_gsp,
    audit_sgsp,
    audit_sp,
    audit_structure,
    default_audit_config,
)
from _spfacility.instances import (
    FamilySpec,
    fixture_names,
    gen_random,
    resolve_fixture,
)
from _spfacility.mechanisms import MechanismId, MechanismSpec, run as run_mechanism
from _spfacility.metric import (
    Instance,
    MetricKind,
    MetricSpec,
    ObjectiveMode,
    Outcome,
    Point,
)
from _spfacility.oracles import DEFAULT_CELL_BUDGET, brute_force_center, optimal
from _spfacility.result_handler import ClickResultHandler
from _spfacility.serialization import (
    audit_report_to_dict,
    curve_frame,
    dump_instance,
    dumps_report,
    instance_to_dict,
    load_instance,
    oracle_result_to_dict,
    probe_result_to_dict,
    ratio_report_to_dict,
    write_csv,
)
from _spfacility.util import (
    InputError,
    SolverError,
    UnsupportedBoundError,
    make_rng,
)

logger = logging.getLogger(__name__)

EXIT_VIOLATIONS = 1
"""Exit status when a bound, audit or cross-check fails."""
EXIT_INPUT_ERROR = 2
EXIT_SOLVER_ERROR = 3
EXIT_UNEXPECTED = 4

F = TypeVar("F", bound=Callable[..., Any])


class _SpFacilityGroup(click.Group):
    """Prints a specially formatted help epilogue that lists mechanisms and fixtures."""

    def format_epilog(self, ctx: click.Context, formatter: click.HelpFormatter) -> None:
        """Write the epilog into the formatter if it exists."""
        with formatter.section("Mechanisms"):
            formatter.write_text(", ".join(item.value for item in MechanismId))
        with formatter.section("Fixtures (address as NAME or NAME:key=value,...)"):
            formatter.write_text(", ".join(fixture_names()))


class _UnknownConfigException(Exception):
    """Raised upon encountering an unsupported configuration value or section."""

    def __init__(self, file_: str, section: str, option: Optional[str] = None) -> None:
        """Raise exception for unknown option *option* in section *section* of *file_*.

        :param file_: path of the configuration file where the unknown element was found
        :param section: section where the unknown element was found
        :param option: the option that was unknown. If *option* is ``None``, it is
            assumed that *section* is the unknown element instead.

        """
        message = f"Error parsing configuration file {file_}: "
        if option is None:
            message += f"section '{section}' not supported."
        else:
            message += f"option '{option}' in section '{section}' not supported."
        self.message = message
        super().__init__(self.message)


class RunConfig(NamedTuple):
    """Everything that determines the output of one run."""

    command: Optional[str] = None
    mechanism: Optional[MechanismSpec] = None
    source: Optional[str] = None
    """instance file, fixture address or generator description"""
    objective: Optional[ObjectiveMode] = None
    seed: Optional[int] = None
    tol: Optional[float] = None
    grid_step: Optional[float] = None
    """spacing of the grid oracle"""
    cell_budget: Optional[int] = None
    """largest grid the grid oracle evaluates"""
    threads: Optional[int] = None
    output_dir: Optional[Path] = None
    output: Optional[Path] = None
    """file the machine-readable result is written to, relative to
    :attr:`output_dir`"""
    debug: Optional[bool] = None

    def merge(self, other: RunConfig) -> RunConfig:
        """Return a new config with merged values of this config and *other*.

        :param other: entries that are not ``None`` in this config are merged into the
            new one
        :returns: the merged config

        """
        set_fields = {
            field: getattr(other, field)
            for field in other._fields
            if getattr(other, field) is not None
        }
        return self._replace(**set_fields)

    @property
    def output_path(self) -> Optional[Path]:
        if self.output is None:
            return None
        return Path(self.output_dir or ".", self.output)


class SweepConfig(NamedTuple):
    """Instance family and error grid of a sweep."""

    eta_grid: Optional[Tuple[float, ...]] = None
    trials: Optional[int] = None
    n: Optional[int] = None
    box: Optional[Tuple[float, float]] = None

    def merge(self, other: SweepConfig) -> SweepConfig:
        """Return a new config with merged values of this config and *other*.

        :param other: entries that are not ``None`` in this config are merged into the
            new one
        :returns: the merged config

        """
        set_fields = {
            field: getattr(other, field)
            for field in other._fields
            if getattr(other, field) is not None
        }
        return self._replace(**set_fields)


class _Session(NamedTuple):
    run: RunConfig
    sweep: SweepConfig
    audit: AuditConfig


def _create_default_ini_config() -> configparser.ConfigParser:
    """Return the default ini-style configuration.

    :returns: a populated configuration with all supported sections and options

    """
    config = configparser.ConfigParser()
    config.read_dict(
        {
            "spfacility": {
                "seed": "0",
                "objective": ObjectiveMode.EXPECTED_MAX.value,
                "tol": "1e-9",
                "grid_step": "1e-2",
                "cell_budget": str(DEFAULT_CELL_BUDGET),
                "threads": "0",
                "output_dir": ".",
            },
            "spfacility.sweep": {
                "eta_grid": "0,0.25,0.5,1,2",
                "trials": "200",
                "n": "5",
                "box": "0,1",
            },
            "spfacility.audit": {
                field: str(getattr(default_audit_config, field))
                for field in default_audit_config._fields
                if field != "threads"
            },
        }
    )
    return config


def _parse_float_list(text: str, name: str) -> Tuple[float, ...]:
    try:
        values = tuple(float(item) for item in text.split(",") if item.strip())
    except ValueError as exception:
        raise InputError(f"{name} must be a comma separated list of numbers") from exception
    if not values:
        raise InputError(f"{name} must not be empty")
    return values


def _parse_box(text: str) -> Tuple[float, float]:
    values = _parse_float_list(text, "box")
    if len(values) != 2:
        raise InputError(f"box must be 'min,max', got '{text}'")
    return values[0], values[1]


def _configs_from_ini(
    config: configparser.ConfigParser,
) -> Tuple[RunConfig, SweepConfig, AuditConfig]:
    """Return typed configuration objects for the values in *config*.

    :raises InputError: if a value can not be converted

    """
    try:
        section = config["spfacility"]
        run = RunConfig(
            objective=ObjectiveMode(section.get("objective")),
            seed=section.getint("seed"),
            tol=section.getfloat("tol"),
            grid_step=section.getfloat("grid_step"),
            cell_budget=section.getint("cell_budget"),
            threads=section.getint("threads"),
            output_dir=Path(section.get("output_dir")),
        )
        section = config["spfacility.sweep"]
        sweep = SweepConfig(
            eta_grid=_parse_float_list(section.get("eta_grid"), "eta_grid"),
            trials=section.getint("trials"),
            n=section.getint("n"),
            box=_parse_box(section.get("box")),
        )
        section = config["spfacility.audit"]
        audit = default_audit_config.merge(
            AuditConfig(
                **{
                    option: section.getint(option)
                    for option in config.options("spfacility.audit")
                }
            )
        )
    except ValueError as exception:
        raise InputError(f"Invalid configuration value: {exception}") from exception
    return run, sweep, audit


def _handle_verbosity_arg(
    ctx: click.Context, param: click.Parameter, value: Optional[bool]
) -> Optional[bool]:
    if value:
        configure_logger(logging.INFO)
    return value


def _handle_debug_arg(
    ctx: click.Context, param: click.Parameter, value: Optional[bool]
) -> Optional[bool]:
    if value:
        configure_logger(logging.DEBUG)
    return value


def _handle_config_arg(
    ctx: click.Context, param: click.Parameter, value: Optional[Path]
) -> configparser.ConfigParser:
    config_path = value

    # Read default config:
    config = _create_default_ini_config()

    # Update config with user-provided values, if supported:
    if config_path:
        logger.info(f"Reading user provided config file '{config_path}'")
        try:
            with open(config_path) as file_:
                user_config = configparser.ConfigParser()
                user_config.read_file(file_)
                for section in user_config.sections():
                    if not config.has_section(section):
                        raise _UnknownConfigException(str(config_path), section)
                    for option in user_config.options(section):
                        if not config.has_option(section, option):
                            raise _UnknownConfigException(
                                str(config_path), section, option
                            )
                        config.set(section, option, user_config.get(section, option))
        except (OSError, configparser.Error, _UnknownConfigException) as exp:
            print(
                f"Could not read config file '{value}'! Reason: {exp}",
                file=sys.stderr,
            )
            sys.exit(EXIT_INPUT_ERROR)
    return config


def _handle_version_arg(
    ctx: click.Context, param: click.Parameter, value: Optional[bool]
) -> None:
    if value:
        name = metadata("spfacility")["Name"]
        version_ = version("spfacility")
        click.echo(f"{name} v{version_}")
        sys.exit(0)


def _handles_errors(f: F) -> F:
    """Map the errors of a subcommand to exit codes.

    Input errors exit with :data:`EXIT_INPUT_ERROR`, solver errors with
    :data:`EXIT_SOLVER_ERROR`. Unexpected errors are re-raised in debug mode.

    """

    @wraps(f)
    def wrapper(session: _Session, *args: Any, **kwargs: Any) -> Any:
        try:
            return f(session, *args, **kwargs)
        except (InputError, UnsupportedBoundError, OSError) as error:
            click.echo(f"Error: {error}", err=True)
            sys.exit(EXIT_INPUT_ERROR)
        except SolverError as error:
            click.echo(f"Solver error: {error}", err=True)
            sys.exit(EXIT_SOLVER_ERROR)
        except Exception as error:
            print(f"Unexpected error occured: {error}. ", file=sys.stderr)
            if session.run.debug:
                raise
            click.echo(
                "Run command with option '-d/--debug' for full stack trace.", err=True
            )
            sys.exit(EXIT_UNEXPECTED)

    return wrapper  # type: ignore[return-value]


@click.group(
    cls=_SpFacilityGroup,
    context_settings={"help_option_names": ["--help", "-h"]},
)
@click.option(
    "-c",
    "--config",
    help="Load a configuration file located at PATH.",
    default=None,
    type=click.Path(path_type=Path),
    callback=_handle_config_arg,
)
@click.option("--seed", type=int, default=None, help="Seed of all random streams.")
@click.option(
    "--objective",
    type=click.Choice([mode.value for mode in ObjectiveMode]),
    default=None,
    help="Aggregation of the maximum cost over randomized outcomes.",
)
@click.option("--tol", type=float, default=None, help="Tolerance of the 1-center solver.")
@click.option(
    "--threads",
    type=int,
    default=None,
    help="Size of the worker pool, 0 for one thread per CPU.",
)
@click.option(
    "--output-dir",
    type=click.Path(path_type=Path),
    default=None,
    envvar="SPFACILITY_OUTPUT_DIR",
    help="Directory for files written with -o/--output.",
)
@click.option(
    "-v",
    "--verbose",
    help="Set verbose mode.",
    callback=_handle_verbosity_arg,
    is_flag=True,
)
@click.option(
    "-d",
    "--debug",
    help="Set debugging mode. Lots of messages.",
    callback=_handle_debug_arg,
    is_flag=True,
)
@click.option(
    "-V",
    "--version",
    help="Show version information.",
    default=None,
    is_flag=True,
    callback=_handle_version_arg,
    expose_value=False,
)
@click.pass_context
def cli(
    ctx: click.Context,
    config: configparser.ConfigParser,
    seed: Optional[int],
    objective: Optional[str],
    tol: Optional[float],
    threads: Optional[int],
    output_dir: Optional[Path],
    verbose: Optional[bool],
    debug: Optional[bool],
) -> None:
    """Evaluate, sweep and audit strategyproof facility location mechanisms."""
    try:
        run, sweep, audit = _configs_from_ini(config)
    except InputError as error:
        click.echo(f"Error: {error}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    run = run.merge(
        RunConfig(
            objective=ObjectiveMode(objective) if objective else None,
            seed=seed,
            tol=tol,
            threads=threads,
            output_dir=output_dir,
            debug=bool(debug),
        )
    )
    ctx.obj = _Session(run, sweep, audit.merge(AuditConfig(threads=run.threads)))


def _mechanism_arguments(f: F) -> F:
    f = click.option(
        "--q",
        type=float,
        default=None,
        help="Mixing probability of MixedLine and Mixed2D.",
    )(f)
    return click.argument(
        "mechanism", type=click.Choice([item.value for item in MechanismId])
    )(f)


def _instance_options(f: F) -> F:
    f = click.option(
        "--fixture",
        default=None,
        metavar="NAME",
        help="Use the named fixture, e.g. 'bbox_tight:p=2,eta=1'.",
    )(f)
    return click.option(
        "-i",
        "--instance",
        type=click.Path(path_type=Path),
        default=None,
        help="Read the instance from the JSON file at PATH.",
    )(f)


def _output_option(f: F) -> F:
    return click.option(
        "-o",
        "--output",
        type=click.Path(path_type=Path),
        default=None,
        help="Write the machine-readable result to PATH inside the output directory.",
    )(f)


def _load_instances(
    instance: Optional[Path], fixture: Optional[str]
) -> Tuple[str, List[Instance]]:
    """Return a description of the source and its instances.

    :raises InputError: unless exactly one of *instance* and *fixture* is given

    """
    if (instance is None) == (fixture is None):
        raise InputError("Pass exactly one of --instance and --fixture")
    if instance is not None:
        return str(instance), [load_instance(instance)]
    return f"fixture {fixture}", resolve_fixture(fixture)  # type: ignore[arg-type]


def _write_output(run: RunConfig, text: str) -> None:
    path = run.output_path
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as file_:
        file_.write(text)
    logger.info(f"Wrote {run.command} result to '{path}'")


def _finish(violations: bool) -> None:
    if violations:
        sys.exit(EXIT_VIOLATIONS)


def _sample_locations(outcome: Outcome, count: int, seed: int, index: int) -> List[Point]:
    """Draw *count* facility locations from *outcome* with the stream of cell *index*.

    :raises InputError: if *count* is negative

    """
    if count < 0:
        raise InputError(f"Number of samples must be non-negative, got {count}")
    points = outcome.points
    weights = np.array([weight for _, weight in outcome])
    generator = make_rng(seed, "eval", index)
    drawn = generator.choice(len(points), size=count, p=weights / weights.sum())
    return [points[position] for position in drawn]


@cli.command("eval")
@_mechanism_arguments
@_instance_options
@click.option(
    "--samples",
    type=int,
    default=0,
    show_default=True,
    help="Also draw this many seeded facility locations from the outcome.",
)
@_output_option
@click.pass_obj
@_handles_errors
def eval_command(
    session: _Session,
    mechanism: str,
    q: Optional[float],
    instance: Optional[Path],
    fixture: Optional[str],
    samples: int,
    output: Optional[Path],
) -> None:
    """Evaluate MECHANISM on one instance and compare it with its bound."""
    spec = MechanismSpec.parse(mechanism, q)
    source, instances = _load_instances(instance, fixture)
    run = session.run.merge(
        RunConfig(command="eval", mechanism=spec, source=source, output=output)
    )
    handler = ClickResultHandler()
    records = []
    failed = False
    for index, item in enumerate(instances):
        report = approx_ratio(spec, item, run.objective, run.tol)  # type: ignore[arg-type]
        handler.handle_result(f"{spec.label} on {source} [{index}]", report)
        record = ratio_report_to_dict(spec, item, report)
        if samples:
            outcome = run_mechanism(spec, item)
            seed = int(run.seed)  # type: ignore[arg-type]
            drawn = _sample_locations(outcome, samples, seed, index)
            click.echo(f"  samples: {', '.join(str(point) for point in drawn)}")
            record["samples"] = [list(point) for point in drawn]
        records.append(record)
        failed = failed or not report.within_bound
    _write_output(run, dumps_report(records))
    _finish(failed)


@cli.command("sweep")
@_mechanism_arguments
@click.option(
    "--metric",
    type=click.Choice([kind.value for kind in MetricKind]),
    default=MetricKind.LINE.value,
    show_default=True,
)
@click.option("--p", type=float, default=None, help="Exponent of the l_p plane.")
@click.option("--n", type=int, default=None, help="Number of agents.")
@click.option("--box", default=None, help="Coordinate range 'min,max' of the agents.")
@click.option("--eta-grid", default=None, help="Comma separated prediction errors.")
@click.option("--trials", type=int, default=None, help="Instances per error value.")
@click.option("--seed", type=int, default=None, help="Seed of the instance family.")
@_output_option
@click.pass_obj
@_handles_errors
def sweep_command(
    session: _Session,
    mechanism: str,
    q: Optional[float],
    metric: str,
    p: Optional[float],
    n: Optional[int],
    box: Optional[str],
    eta_grid: Optional[str],
    trials: Optional[int],
    seed: Optional[int],
    output: Optional[Path],
) -> None:
    """Measure the worst ratio of MECHANISM over random instances per error value.

    The curve is written as CSV with -o/--output.

    """
    spec = MechanismSpec.parse(mechanism, q)
    sweep = session.sweep.merge(
        SweepConfig(
            eta_grid=_parse_float_list(eta_grid, "eta-grid") if eta_grid else None,
            trials=trials,
            n=n,
            box=_parse_box(box) if box else None,
        )
    )
    metric_spec = MetricSpec(MetricKind(metric), p).validate()
    run = session.run.merge(
        RunConfig(
            command="sweep",
            mechanism=spec,
            source=f"random {metric_spec} n={sweep.n} box={sweep.box}",
            seed=seed,
            output=output,
        )
    )
    family = FamilySpec(
        metric=metric_spec,
        n=int(sweep.n),  # type: ignore[arg-type]
        box=(sweep.box,) * metric_spec.dimension,  # type: ignore[arg-type]
        seed=int(run.seed),  # type: ignore[arg-type]
    )
    curve = gamma_sweep(
        spec,
        family,
        sweep.eta_grid,  # type: ignore[arg-type]
        int(sweep.trials),  # type: ignore[arg-type]
        run.objective,  # type: ignore[arg-type]
        run.tol,  # type: ignore[arg-type]
        int(run.threads),  # type: ignore[arg-type]
    )
    ClickResultHandler().handle_result(f"{spec.label} on {run.source}", curve)
    _write_output(run, write_csv(curve_frame(spec, curve, metric_spec.p, family.seed)))
    _finish(
        any(
            point.worst_ratio is not None
            and point.bound is not None
            and point.worst_ratio > point.bound + BOUND_TOL
            for point in curve
        )
    )


_audit_properties = ["sp", "gsp", "sgsp", "structure"]


@cli.command("audit")
@_mechanism_arguments
@_instance_options
@click.option(
    "-p",
    "--property",
    "property_",
    type=click.Choice(_audit_properties + ["all"]),
    default="sp",
    show_default=True,
    help="Property to search violations of.",
)
@click.option(
    "--max-coalition",
    type=int,
    default=None,
    help="Largest coalition, by default the configured size capped at the agent count.",
)
@click.option(
    "--step", type=float, default=None, help="Deviation grid step, overrides divisor."
)
@click.option("--step-divisor", type=int, default=None)
@click.option("--coarse-divisor", type=int, default=None)
@click.option("--cell-cap", type=int, default=None)
@_output_option
@click.pass_obj
@_handles_errors
def audit_command(
    session: _Session,
    mechanism: str,
    q: Optional[float],
    instance: Optional[Path],
    fixture: Optional[str],
    property_: str,
    max_coalition: Optional[int],
    step: Optional[float],
    step_divisor: Optional[int],
    coarse_divisor: Optional[int],
    cell_cap: Optional[int],
    output: Optional[Path],
) -> None:
    """Search for profitable misreports against MECHANISM.

    Exits with status 1 if a violation was found.

    """
    spec = MechanismSpec.parse(mechanism, q)
    source, instances = _load_instances(instance, fixture)
    run = session.run.merge(
        RunConfig(command="audit", mechanism=spec, source=source, output=output)
    )
    config = session.audit.merge(
        AuditConfig(
            step_divisor=step_divisor,
            coarse_divisor=coarse_divisor,
            max_coalition=max_coalition,
            cell_cap=cell_cap,
        )
    )
    properties = _audit_properties if property_ == "all" else [property_]
    handler = ClickResultHandler()
    records = []
    dirty = False
    for index, item in enumerate(instances):
        grid = DeviationGrid.for_instance(
            item,
            step=step,
            step_divisor=int(config.step_divisor),  # type: ignore[arg-type]
            tol=float(run.tol),  # type: ignore[arg-type]
        )
        for name in properties:
            reports: Sequence[AuditReport]
            if name == "sp":
                reports = [audit_sp(spec, item, grid, config)]
            elif name == "gsp":
                reports = [audit_gsp(spec, item, max_coalition, grid, config)]
            elif name == "sgsp":
                reports = [audit_sgsp(spec, item, max_coalition, grid, config)]
            else:
                reports = audit_structure(spec, item, grid, config)
            for report in reports:
                handler.handle_result(f"{spec.label} on {source} [{index}]", report)
                records.append(audit_report_to_dict(spec, report))
                dirty = dirty or not report.clean
    _write_output(run, dumps_report(records))
    _finish(dirty)


@cli.command("oracle")
@_instance_options
@click.option(
    "--method",
    type=click.Choice(["convex", "grid", "both"]),
    default="both",
    show_default=True,
)
@click.option("--grid-step", type=float, default=None, help="Spacing of the grid oracle.")
@click.option(
    "--cell-budget", type=int, default=None, help="Largest grid of the grid oracle."
)
@_output_option
@click.pass_obj
@_handles_errors
def oracle_command(
    session: _Session,
    instance: Optional[Path],
    fixture: Optional[str],
    method: str,
    grid_step: Optional[float],
    cell_budget: Optional[int],
    output: Optional[Path],
) -> None:
    """Compute the optimal facility location of an instance's agents.

    With both methods, exits with status 1 if they disagree by more than their
    tolerances.

    """
    source, instances = _load_instances(instance, fixture)
    run = session.run.merge(
        RunConfig(
            command="oracle",
            source=source,
            grid_step=grid_step,
            cell_budget=cell_budget,
            output=output,
        )
    )
    handler = ClickResultHandler()
    records: List[Dict[str, Any]] = []
    disagree = False
    for index, item in enumerate(instances):
        results = []
        if method in ("convex", "both"):
            results.append(optimal(item.metric, item.profile, run.tol))  # type: ignore[arg-type]
        if method in ("grid", "both"):
            results.append(
                brute_force_center(
                    item.profile,
                    item.metric,
                    run.grid_step,  # type: ignore[arg-type]
                    cell_budget=run.cell_budget,  # type: ignore[arg-type]
                )
            )
        for result in results:
            handler.handle_result(f"Optimum of {source} [{index}]", result)
            records.append(oracle_result_to_dict(result))
        if len(results) == 2:
            gap = abs(results[0].cost - results[1].cost)
            disagree = disagree or gap > results[1].tolerance + results[0].tolerance + BOUND_TOL
    _write_output(run, dumps_report(records))
    _finish(disagree)


@cli.command("gen")
@click.option(
    "--metric",
    type=click.Choice([kind.value for kind in MetricKind]),
    default=MetricKind.LINE.value,
    show_default=True,
)
@click.option("--p", type=float, default=None, help="Exponent of the l_p plane.")
@click.option("--n", type=int, default=None, help="Number of agents.")
@click.option("--eta", type=float, default=None, help="Exact prediction error.")
@click.option("--box", default=None, help="Coordinate range 'min,max' of the agents.")
@click.option("--seed", type=int, default=None, help="Seed of the instance.")
@click.option("--fixture", default=None, metavar="NAME", help="Write a fixture instead.")
@_output_option
@click.pass_obj
@_handles_errors
def gen_command(
    session: _Session,
    metric: str,
    p: Optional[float],
    n: Optional[int],
    eta: Optional[float],
    box: Optional[str],
    seed: Optional[int],
    fixture: Optional[str],
    output: Optional[Path],
) -> None:
    """Write a random instance, or a fixture, in the instance file format.

    Without -o/--output the instance is printed.

    """
    run = session.run.merge(RunConfig(command="gen", seed=seed, output=output))
    if fixture is not None:
        instances = resolve_fixture(fixture)
        if len(instances) != 1:
            raise InputError(
                f"Fixture '{fixture}' has {len(instances)} instances, select one "
                f"with ':index=K'"
            )
        generated = instances[0]
    else:
        metric_spec = MetricSpec(MetricKind(metric), p).validate()
        coordinates = _parse_box(box) if box else session.sweep.box
        generated = gen_random(
            FamilySpec(
                metric=metric_spec,
                n=n if n is not None else int(session.sweep.n),  # type: ignore[arg-type]
                box=(coordinates,) * metric_spec.dimension,  # type: ignore[arg-type]
                eta_target=eta,
                seed=int(run.seed),  # type: ignore[arg-type]
            ),
            float(run.tol),  # type: ignore[arg-type]
        )
    text = dump_instance(generated)
    if run.output_path is None:
        click.echo(text, nl=False)
    _write_output(run, text)


@cli.group("adversary")
def adversary_group() -> None:
    """Run mechanisms on worst-case constructions."""


@adversary_group.command("rand-lb")
@_mechanism_arguments
@_output_option
@click.pass_obj
@_handles_errors
def rand_lb_command(
    session: _Session, mechanism: str, q: Optional[float], output: Optional[Path]
) -> None:
    """Ratios of MECHANISM on the two-instance lower bound for randomized mechanisms."""
    spec = MechanismSpec.parse(mechanism, q)
    run = session.run.merge(
        RunConfig(command="adversary", mechanism=spec, source="rand_lb", output=output)
    )
    probe = randomized_lower_bound_probe(spec, run.objective)  # type: ignore[arg-type]
    ClickResultHandler().handle_result(f"{spec.label} on fixture rand_lb", probe)
    _write_output(
        run,
        dumps_report(
            {"mechanism": spec.id.value, "q": spec.q, "ratios": list(probe.ratios)}
        ),
    )


def _tightness_output(
    run: RunConfig, spec: MechanismSpec, curve: Sequence[Any], p: Optional[float]
) -> None:
    ClickResultHandler().handle_result(f"{spec.label} on {run.source}", curve)
    _write_output(run, write_csv(curve_frame(spec, curve, p, int(run.seed))))  # type: ignore[arg-type]
    _finish(
        any(
            point.worst_ratio < point.bound - BOUND_TOL
            or point.worst_ratio > point.bound + BOUND_TOL
            for point in curve
        )
    )


@adversary_group.command("minmaxp-tight")
@click.option("--eta-grid", default="0,0.5,1,2,3", show_default=True)
@_output_option
@click.pass_obj
@_handles_errors
def minmaxp_tight_command(
    session: _Session, eta_grid: str, output: Optional[Path]
) -> None:
    """MinMaxP on its tight family; exits with status 1 unless ratio equals bound."""
    spec = MechanismSpec(MechanismId.MIN_MAX_P)
    run = session.run.merge(
        RunConfig(command="adversary", source="minmaxp_tight", output=output)
    )
    curve = minmaxp_tightness_curve(_parse_float_list(eta_grid, "eta-grid"))
    _tightness_output(run, spec, curve, None)


@adversary_group.command("bbox-tight")
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--eta-grid", default="0,1,2,3", show_default=True)
@_output_option
@click.pass_obj
@_handles_errors
def bbox_tight_command(
    session: _Session, p: float, eta_grid: str, output: Optional[Path]
) -> None:
    """BoundingBox on its tight family; exits with status 1 unless ratio equals
    bound."""
    spec = MechanismSpec(MechanismId.BOUNDING_BOX)
    run = session.run.merge(
        RunConfig(command="adversary", source=f"bbox_tight:p={p:g}", output=output)
    )
    curve = bbox_tightness_curve(
        p, _parse_float_list(eta_grid, "eta-grid"), float(run.tol)  # type: ignore[arg-type]
    )
    _tightness_output(run, spec, curve, p)


@adversary_group.command("sgsp-moving")
@_mechanism_arguments
@click.option("--k", type=int, default=100, show_default=True)
@click.option("--prediction", type=float, default=0.0, show_default=True)
@_output_option
@click.pass_obj
@_handles_errors
def sgsp_moving_command(
    session: _Session,
    mechanism: str,
    q: Optional[float],
    k: int,
    prediction: float,
    output: Optional[Path],
) -> None:
    """MECHANISM while the rightmost of three agents walks away in steps of 1/100."""
    spec = MechanismSpec.parse(mechanism, q)
    run = session.run.merge(
        RunConfig(
            command="adversary",
            mechanism=spec,
            source=f"sgsp_moving:k={k},prediction={prediction:g}",
            output=output,
        )
    )
    steps = sgsp_moving_probe(spec, k, prediction, run.objective)  # type: ignore[arg-type]
    ClickResultHandler().handle_result(f"{spec.label} on {run.source}", steps)
    _write_output(
        run,
        dumps_report(
            [
                {
                    "step": step.step,
                    "rightmost": step.rightmost,
                    "ratio": step.ratio,
                    "side": step.side.value,
                }
                for step in steps
            ]
        ),
    )


@adversary_group.command("robustness")
@_mechanism_arguments
@_instance_options
@click.option("--step", type=float, default=None, help="Prediction grid spacing.")
@_output_option
@click.pass_obj
@_handles_errors
def robustness_command(
    session: _Session,
    mechanism: str,
    q: Optional[float],
    instance: Optional[Path],
    fixture: Optional[str],
    step: Optional[float],
    output: Optional[Path],
) -> None:
    """Worst ratio of MECHANISM over a grid of predictions around each profile."""
    spec = MechanismSpec.parse(mechanism, q)
    source, instances = _load_instances(instance, fixture)
    run = session.run.merge(
        RunConfig(command="adversary", mechanism=spec, source=source, output=output)
    )
    handler = ClickResultHandler()
    records = []
    for index, item in enumerate(instances):
        result = robustness_probe(
            spec,
            item.metric,
            item.profile,
            step=step,
            mode=run.objective,  # type: ignore[arg-type]
            tol=float(run.tol),  # type: ignore[arg-type]
            threads=int(run.threads),  # type: ignore[arg-type]
        )
        handler.handle_result(f"{spec.label} on {source} [{index}]", result)
        record = probe_result_to_dict(spec, result)
        record["instance"] = instance_to_dict(item)
        records.append(record)
    _write_output(run, dumps_report(records))
