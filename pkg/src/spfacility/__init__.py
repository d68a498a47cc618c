"""Public module of spfacility.

This module exports those objects from :mod:`_spfacility` that are part of the public
API.
"""
from _spfacility.adversary import (
    LowerBoundProbe,
    MovingStep,
    Side,
    bbox_tightness_curve,
    minmaxp_tightness_curve,
    randomized_lower_bound_probe,
    sgsp_moving_probe,
)
from _spfacility.analysis import (
    CurvePoint,
    ProbeResult,
    RatioReport,
    approx_ratio,
    bound_violations,
    closed_form_bound,
    gamma_sweep,
    guarantees,
    robustness_probe,
)
from _spfacility.auditor import (
    AuditConfig,
    AuditReport,
    Deviation,
    DeviationGrid,
    Property,
    audit_gsp,
    audit_sgsp,
    audit_sp,
    audit_structure,
    replay,
    reproduces,
)
from _spfacility.instances import (
    FamilySpec,
    fixture_bbox_tight,
    fixture_cm_tight,
    fixture_lrm_sgsp,
    fixture_minmaxp_tight,
    fixture_rand_lb,
    fixture_sgsp_moving,
    gen_random,
    resolve_fixture,
)
from _spfacility.mechanisms import MechanismId, MechanismSpec, run
from _spfacility.metric import (
    Instance,
    MetricKind,
    MetricSpec,
    ObjectiveMode,
    Outcome,
    Profile,
    distance,
    expected_cost,
    expected_objective,
    max_cost,
)
from _spfacility.oracles import (
    Certificate,
    ErrorValue,
    OracleResult,
    brute_force_center,
    optimal,
    prediction_error,
)
from _spfacility.serialization import dump_instance, load_instance, parse_instance
from _spfacility.util import (
    InputError,
    InstanceFormatError,
    SolverError,
    SpFacilityError,
    UnsupportedBoundError,
)

__all__ = [
    "LowerBoundProbe",
    "MovingStep",
    "Side",
    "bbox_tightness_curve",
    "minmaxp_tightness_curve",
    "randomized_lower_bound_probe",
    "sgsp_moving_probe",
    "CurvePoint",
    "ProbeResult",
    "RatioReport",
    "approx_ratio",
    "bound_violations",
    "closed_form_bound",
    "gamma_sweep",
    "guarantees",
    "robustness_probe",
    "AuditConfig",
    "AuditReport",
    "Deviation",
    "DeviationGrid",
    "Property",
    "audit_gsp",
    "audit_sgsp",
    "audit_sp",
    "audit_structure",
    "replay",
    "reproduces",
    "FamilySpec",
    "fixture_bbox_tight",
    "fixture_cm_tight",
    "fixture_lrm_sgsp",
    "fixture_minmaxp_tight",
    "fixture_rand_lb",
    "fixture_sgsp_moving",
    "gen_random",
    "resolve_fixture",
    "MechanismId",
    "MechanismSpec",
    "run",
    "Instance",
    "MetricKind",
    "MetricSpec",
    "ObjectiveMode",
    "Outcome",
    "Profile",
    "distance",
    "expected_cost",
    "expected_objective",
    "max_cost",
    "Certificate",
    "ErrorValue",
    "OracleResult",
    "brute_force_center",
    "optimal",
    "prediction_error",
    "dump_instance",
    "load_instance",
    "parse_instance",
    "InputError",
    "InstanceFormatError",
    "SolverError",
    "SpFacilityError",
    "UnsupportedBoundError",
]
