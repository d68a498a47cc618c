"""Search for profitable misreports of single agents and coalitions.

Incentives are judged by every agent's expected distance to the facility, the
``MaxOfExpected`` reading of a randomized outcome. A misreport is profitable for an
agent if it lowers this cost by more than :data:`~_spfacility.util.ABS_TOL`.

"""
from __future__ import annotations

import itertools
import logging
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from _spfacility.mechanisms import MechanismSpec, run, run_batch
from _spfacility.metric import (
    Instance,
    Outcome,
    Point,
    Profile,
    distance_array,
    expected_cost,
)
from _spfacility.oracles import DEFAULT_TOL, grid_axis, optimal
from _spfacility.util import ABS_TOL, InputError, parallel_map

logger = logging.getLogger(__name__)

_BATCH_CELLS = 100_000


class Property(str, Enum):
    """The incentive and structural properties the auditor checks."""

    SP = "SP"
    GSP = "GSP"
    SGSP = "SGSP"
    UNCOMPROMISING = "Uncompromising"
    UNANIMITY = "Unanimity"
    RANGE = "Range"


class Deviation(NamedTuple):
    """A joint misreport of a coalition and what it changes for its members."""

    coalition: Tuple[int, ...]
    """indices of the deviating agents, ascending"""
    misreports: Tuple[Point, ...]
    """reported location of each coalition member"""
    deltas: Tuple[float, ...]
    """cost under the truthful outcome minus cost under the deviated outcome, per
    member; positive means the member gains"""
    note: str = ""


class AuditConfig(NamedTuple):
    """Search budget of an audit.

    ``None`` entries are filled in from the defaults by :meth:`merge`.

    """

    step_divisor: Optional[int] = None
    """deviation grid step is the profile diameter divided by this"""
    coarse_divisor: Optional[int] = None
    """the same for coalitions of two or more agents"""
    max_coalition: Optional[int] = None
    """largest coalition searched by default, capped at the number of agents"""
    cell_cap: Optional[int] = None
    """largest number of deviations evaluated by one audit"""
    max_witnesses: Optional[int] = None
    """largest number of violations kept in a report; all are counted"""
    threads: Optional[int] = None

    def merge(self, other: AuditConfig) -> AuditConfig:
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


default_audit_config = AuditConfig(
    step_divisor=40,
    coarse_divisor=4,
    max_coalition=3,
    cell_cap=10_000_000,
    max_witnesses=100,
    threads=0,
)


class DeviationGrid(NamedTuple):
    """Candidate misreports: a regular grid plus injected special points."""

    bounds: Tuple[Tuple[float, float], ...]
    step: float
    special: Tuple[Point, ...]
    """agent locations, the prediction and the optimum"""

    @classmethod
    def for_instance(
        cls,
        instance: Instance,
        step: Optional[float] = None,
        bounds: Optional[Sequence[Tuple[float, float]]] = None,
        step_divisor: int = 40,
        tol: float = DEFAULT_TOL,
    ) -> DeviationGrid:
        """Create the default grid of *instance*.

        The grid covers the bounding box inflated by the profile's diameter ``D`` on
        every side (``D = 1`` for a coincident profile) with spacing
        ``D / step_divisor``.

        :param instance: the instance to audit
        :param step: explicit grid spacing
        :param bounds: explicit ``(min, max)`` per coordinate
        :param step_divisor: divisor of the diameter for the default spacing
        :param tol: solver tolerance of the optimum, which is a special point
        :raises InputError: on a non-positive spacing or mismatched bounds
        :returns: the grid

        """
        metric, profile = instance.metric, instance.profile
        diameter = profile.diameter(metric) or 1.0
        if step is None:
            step = diameter / step_divisor
        if not step > 0:
            raise InputError(f"Grid step must be positive, got {step}")
        if bounds is None:
            bounds = tuple(
                (lower - diameter, upper + diameter)
                for lower, upper in profile.bounding_box()
            )
        if len(bounds) != metric.dimension:
            raise InputError(f"Bounds {bounds} do not match metric {metric}")
        center = optimal(metric, profile, tol).location
        special = tuple(
            dict.fromkeys(
                tuple(float(c) for c in point)
                for point in profile.points + (instance.prediction, center)
            )
        )
        return cls(
            tuple((float(lower), float(upper)) for lower, upper in bounds),
            float(step),
            special,
        )

    def points(self, inject_axes: bool = True) -> List[Point]:
        """Return the candidate misreports, special points first.

        :param inject_axes: whether the coordinates of the special points are added
            to the grid axes before the cartesian product is taken
        :returns: distinct points in a fixed order

        """
        axes = []
        for axis, (lower, upper) in enumerate(self.bounds):
            values = grid_axis(lower, upper, self.step).tolist()
            if inject_axes:
                values.extend(point[axis] for point in self.special)
            axes.append(sorted(set(values)))
        grid = (tuple(point) for point in itertools.product(*axes))
        return list(dict.fromkeys(itertools.chain(self.special, grid)))

    def coarsen(self, divisor: int, diameter: float) -> DeviationGrid:
        """Return the same grid with spacing ``diameter / divisor``."""
        return self._replace(step=diameter / divisor)

    def __str__(self) -> str:
        box = " x ".join(f"[{lower:g}, {upper:g}]" for lower, upper in self.bounds)
        return f"{box} step {self.step:g} + {len(self.special)} special points"


class AuditReport(NamedTuple):
    """Result of searching for violations of one property."""

    property: Property
    violations: Tuple[Deviation, ...]
    """witnesses, at most ``max_witnesses`` of them"""
    violation_count: int
    cells_searched: int
    grid: DeviationGrid
    complete: bool = True
    """``False`` if the cell cap stopped the search early"""

    @property
    def clean(self) -> bool:
        return self.violation_count == 0


def _member_costs(
    instance: Instance, outcome: Outcome, members: Sequence[int]
) -> List[float]:
    return [
        expected_cost(instance.metric, instance.profile.points[i], outcome)
        for i in members
    ]


def replay(
    spec: MechanismSpec, instance: Instance, deviation: Deviation
) -> Tuple[float, ...]:
    """Recompute the cost changes of *deviation*.

    :param spec: the mechanism
    :param instance: the truthful instance
    :param deviation: coalition and misreports; its deltas are ignored
    :raises InputError: on an empty coalition or misreports that do not fit
    :returns: truthful minus deviated expected cost, per coalition member

    """
    if not deviation.coalition:
        raise InputError("A deviation needs a non-empty coalition")
    if len(deviation.coalition) != len(deviation.misreports):
        raise InputError("A deviation needs one misreport per coalition member")
    truthful = run(spec, instance)
    deviated = run(
        spec,
        instance.with_profile(
            instance.profile.replace(deviation.coalition, deviation.misreports)
        ),
    )
    before = _member_costs(instance, truthful, deviation.coalition)
    after = _member_costs(instance, deviated, deviation.coalition)
    return tuple(b - a for b, a in zip(before, after))


def reproduces(
    spec: MechanismSpec, instance: Instance, deviation: Deviation, tol: float = ABS_TOL
) -> bool:
    """Return whether replaying *deviation* yields its recorded deltas within *tol*."""
    return all(
        abs(recorded - measured) <= tol
        for recorded, measured in zip(
            deviation.deltas, replay(spec, instance, deviation)
        )
    )


def _is_violation(prop: Property, deltas: Sequence[float]) -> bool:
    if prop in (Property.SP, Property.GSP):
        return all(delta > ABS_TOL for delta in deltas)
    return any(delta > ABS_TOL for delta in deltas) and all(
        delta >= -ABS_TOL for delta in deltas
    )


class _Search:
    """Evaluates deviations from one truthful outcome and collects witnesses."""

    def __init__(
        self,
        spec: MechanismSpec,
        instance: Instance,
        prop: Property,
        config: AuditConfig,
    ) -> None:
        self.spec = spec
        self.instance = instance
        self.prop = prop
        self.config = default_audit_config.merge(config)
        self.truthful = run(spec, instance)
        self.truthful_costs = _member_costs(
            instance, self.truthful, range(instance.profile.n)
        )
        self.witnesses: List[Deviation] = []
        self.count = 0
        self.cells = 0
        self.complete = True

    def deltas(
        self, coalition: Tuple[int, ...], misreports: Tuple[Point, ...]
    ) -> Tuple[float, ...]:
        profile = self.instance.profile.replace(coalition, misreports)
        outcome = run(self.spec, self.instance.with_profile(profile))
        after = _member_costs(self.instance, outcome, coalition)
        return tuple(self.truthful_costs[i] - cost for i, cost in zip(coalition, after))

    @property
    def remaining(self) -> int:
        return int(self.config.cell_cap) - self.cells  # type: ignore[arg-type]

    def search(self, coalition: Tuple[int, ...], choices: Sequence[Point]) -> None:
        """Try every assignment of *choices* to the members of *coalition*.

        Assignments are visited in the order of :func:`itertools.product`; the
        truthful one is skipped.

        """
        if self.remaining <= 0:
            self.complete = False
        elif self.spec.is_batched:
            self._search_batches(coalition, np.asarray(choices, dtype=float))
        else:
            self._search_cells(coalition, choices)

    def _search_cells(self, coalition: Tuple[int, ...], choices: Sequence[Point]) -> None:
        truthful = tuple(self.instance.profile.points[i] for i in coalition)
        candidates = (
            misreports
            for misreports in itertools.product(choices, repeat=len(coalition))
            if misreports != truthful
        )
        remaining = self.remaining
        cells = list(itertools.islice(candidates, remaining + 1))
        if len(cells) > remaining:
            cells = cells[:remaining]
            self.complete = False
        results = parallel_map(
            lambda misreports: self.deltas(coalition, misreports),
            cells,
            int(self.config.threads),  # type: ignore[arg-type]
        )
        self.cells += len(cells)
        for misreports, deltas in zip(cells, results):
            if _is_violation(self.prop, deltas):
                self.record(Deviation(coalition, misreports, deltas))

    def _search_batches(self, coalition: Tuple[int, ...], table: np.ndarray) -> None:
        members = list(coalition)
        points = np.asarray(self.instance.profile.points, dtype=float)
        truthful = points[members]
        before = np.asarray([self.truthful_costs[i] for i in coalition])
        shape = (len(table),) * len(coalition)
        total = len(table) ** len(coalition)
        for start in range(0, total, _BATCH_CELLS):
            if self.remaining <= 0:
                self.complete = False
                return
            flat = np.arange(start, min(total, start + _BATCH_CELLS))
            index = np.stack(np.unravel_index(flat, shape), axis=1)
            misreports = table[index]
            misreports = misreports[~np.all(misreports == truthful, axis=(1, 2))]
            if len(misreports) > self.remaining:
                misreports = misreports[: self.remaining]
                self.complete = False
            profiles = np.repeat(points[None, :, :], len(misreports), axis=0)
            profiles[:, members, :] = misreports
            after = np.zeros((len(misreports), len(members)))
            for locations, weight in run_batch(  # type: ignore[union-attr]
                self.spec, profiles, self.instance.prediction
            ):
                after += weight * distance_array(
                    self.instance.metric, truthful[None, :, :], locations[:, None, :]
                )
            self.cells += len(misreports)
            self._record_batch(coalition, misreports, before - after)

    def _record_batch(
        self, coalition: Tuple[int, ...], misreports: np.ndarray, deltas: np.ndarray
    ) -> None:
        gains = deltas > ABS_TOL
        if self.prop in (Property.SP, Property.GSP):
            flagged = np.all(gains, axis=1)
        else:
            flagged = np.any(gains, axis=1) & np.all(deltas >= -ABS_TOL, axis=1)
        rows = np.flatnonzero(flagged)
        cap = int(self.config.max_witnesses)  # type: ignore[arg-type]
        room = max(0, cap - len(self.witnesses))
        for row in rows[:room]:
            self.record(
                Deviation(
                    coalition,
                    tuple(tuple(float(c) for c in point) for point in misreports[row]),
                    tuple(float(delta) for delta in deltas[row]),
                )
            )
        self.count += len(rows) - min(room, len(rows))

    def record(self, deviation: Deviation) -> None:
        self.count += 1
        if len(self.witnesses) < int(self.config.max_witnesses):  # type: ignore[arg-type]
            logger.debug(f"{self.prop.value} violation of {self.spec.label}: {deviation}")
            self.witnesses.append(deviation)

    @property
    def exhausted(self) -> bool:
        return self.remaining <= 0

    def report(self, grid: DeviationGrid) -> AuditReport:
        logger.info(
            f"{self.prop.value} audit of {self.spec.label}: {self.count} violations in "
            f"{self.cells} cells{'' if self.complete else ' (incomplete)'}"
        )
        return AuditReport(
            self.prop,
            tuple(self.witnesses),
            self.count,
            self.cells,
            grid,
            self.complete,
        )


def _default_grid(
    instance: Instance, grid: Optional[DeviationGrid], config: AuditConfig
) -> DeviationGrid:
    if grid is not None:
        return grid
    return DeviationGrid.for_instance(
        instance,
        step_divisor=int(default_audit_config.merge(config).step_divisor),  # type: ignore[arg-type]
    )


def audit_sp(
    spec: MechanismSpec,
    instance: Instance,
    grid: Optional[DeviationGrid] = None,
    config: AuditConfig = AuditConfig(),
) -> AuditReport:
    """Search for single agents that gain by misreporting.

    Every agent tries every point of *grid* other than its true location.

    :param spec: the mechanism
    :param instance: the truthful instance
    :param grid: candidate misreports, by default
        :meth:`DeviationGrid.for_instance`
    :param config: search budget, merged into :data:`default_audit_config`
    :returns: the report of property :attr:`Property.SP`

    """
    grid = _default_grid(instance, grid, config)
    search = _Search(spec, instance, Property.SP, config)
    points = grid.points()
    for agent in range(instance.profile.n):
        if search.exhausted:
            search.complete = False
            break
        search.search((agent,), points)
    return search.report(grid)


def _audit_coalitions(
    prop: Property,
    spec: MechanismSpec,
    instance: Instance,
    max_coalition: Optional[int],
    grid: Optional[DeviationGrid],
    config: AuditConfig,
) -> AuditReport:
    grid = _default_grid(instance, grid, config)
    search = _Search(spec, instance, prop, config)
    profile = instance.profile
    if max_coalition is None:
        max_coalition = min(int(search.config.max_coalition), profile.n)  # type: ignore[arg-type]
    if not 1 <= max_coalition <= profile.n:
        raise InputError(
            f"Coalition size must be between 1 and {profile.n}, got {max_coalition}"
        )
    fine = grid.points()
    coarse = grid.coarsen(
        int(search.config.coarse_divisor),  # type: ignore[arg-type]
        profile.diameter(instance.metric) or 1.0,
    ).points(inject_axes=False)
    for size in range(1, max_coalition + 1):
        for coalition in itertools.combinations(range(profile.n), size):
            if search.exhausted:
                search.complete = False
                return search.report(grid)
            search.search(coalition, fine if size == 1 else coarse)
    return search.report(grid)


def audit_gsp(
    spec: MechanismSpec,
    instance: Instance,
    max_coalition: Optional[int] = None,
    grid: Optional[DeviationGrid] = None,
    config: AuditConfig = AuditConfig(),
) -> AuditReport:
    """Search for coalitions whose members all gain by a joint misreport.

    Coalitions of one agent search the full *grid*, exactly like :func:`audit_sp`.
    Larger coalitions let every member report a special point or a point of the
    coarse grid with spacing ``D / coarse_divisor``.

    :param spec: the mechanism
    :param instance: the truthful instance
    :param max_coalition: largest coalition searched, by default the configured size
        capped at the number of agents
    :param grid: candidate misreports of single agents
    :param config: search budget, merged into :data:`default_audit_config`
    :raises InputError: if *max_coalition* is not between 1 and the number of agents
    :returns: the report of property :attr:`Property.GSP`, incomplete if the cell cap
        was hit

    """
    return _audit_coalitions(Property.GSP, spec, instance, max_coalition, grid, config)


def audit_sgsp(
    spec: MechanismSpec,
    instance: Instance,
    max_coalition: Optional[int] = None,
    grid: Optional[DeviationGrid] = None,
    config: AuditConfig = AuditConfig(),
) -> AuditReport:
    """Search for coalitions in which somebody gains and nobody loses.

    The search space is that of :func:`audit_gsp`.

    """
    return _audit_coalitions(Property.SGSP, spec, instance, max_coalition, grid, config)


def _inside(point: Point, box: Sequence[Tuple[float, float]]) -> bool:
    return all(
        lower - ABS_TOL <= value <= upper + ABS_TOL
        for value, (lower, upper) in zip(point, box)
    )


def _everyone(instance: Instance, note: str) -> Deviation:
    n = instance.profile.n
    return Deviation(
        tuple(range(n)), instance.profile.points, (0.0,) * n, note
    )


def audit_structure(
    spec: MechanismSpec,
    instance: Instance,
    grid: Optional[DeviationGrid] = None,
    config: AuditConfig = AuditConfig(),
) -> List[AuditReport]:
    """Check the structural properties every mechanism here is meant to have.

    * Range: every support point lies in ``[x_1, x_n]`` or the bounding box.
    * Unanimity: for every agent location, the profile in which all agents report it
      yields that location with probability 1.
    * Uncompromising, for deterministic line mechanisms only: an agent on one side of
      the output that moves to any grid point on the same side leaves the output
      unchanged.

    :param spec: the mechanism
    :param instance: the instance
    :param grid: candidate reports for the uncompromising check
    :param config: search budget
    :returns: one report per checked property

    """
    grid = _default_grid(instance, grid, config)
    profile = instance.profile
    outcome = run(spec, instance)
    box = profile.bounding_box()
    reports = []

    search = _Search(spec, instance, Property.RANGE, config)
    search.cells = len(outcome)
    for point, weight in outcome:
        if not _inside(point, box):
            search.record(_everyone(instance, f"{point} with weight {weight} outside {box}"))
    reports.append(search.report(grid))

    search = _Search(spec, instance, Property.UNANIMITY, config)
    for location in dict.fromkeys(profile.points):
        unanimous = instance.with_profile(Profile((location,) * profile.n))
        search.cells += 1
        result = run(spec, unanimous)
        if not result.is_deterministic() or result.points[0] != location:
            search.record(
                _everyone(unanimous, f"all agents at {location}, mechanism disagrees")
            )
    reports.append(search.report(grid))

    if instance.metric.is_line and spec.is_deterministic:
        reports.append(_audit_uncompromising(spec, instance, grid, config))
    return reports


def _audit_uncompromising(
    spec: MechanismSpec,
    instance: Instance,
    grid: DeviationGrid,
    config: AuditConfig,
) -> AuditReport:
    search = _Search(spec, instance, Property.UNCOMPROMISING, config)
    output = search.truthful.points[0][0]
    profile = instance.profile
    points = grid.points()
    for agent, (location,) in enumerate(profile.points):
        if location == output:
            continue
        same_side = [
            point
            for point in points
            if point != (location,) and (point[0] - output) * (location - output) >= 0
        ]
        for point in same_side:
            if search.exhausted:
                search.complete = False
                return search.report(grid)
            search.cells += 1
            moved = run(
                spec,
                instance.with_profile(profile.replace((agent,), (point,))),
            )
            if not moved.is_deterministic() or abs(moved.points[0][0] - output) > ABS_TOL:
                search.record(
                    Deviation(
                        (agent,),
                        (point,),
                        search.deltas((agent,), (point,)),
                        f"output moved from {output} to {moved}",
                    )
                )
    return search.report(grid)
