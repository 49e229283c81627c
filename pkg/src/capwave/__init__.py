"""Spectral toolkit for norm-growth experiments on free-surface wave equations."""

from .audits import dno_selftest, run_verify_suite
from .data import SectorDatum, datum_norm, output_region
from .dispersion import DispersionLaw, apply_propagator, propagator_symbols
from .errors import CapwaveError, ConfigError, QuadratureConvergenceError
from .experiments import (
    ScalingRecord,
    SweepConfig,
    fit_exponent,
    model_scaling_degrees,
    records_to_csv,
    records_to_json,
    scaling_sweep,
    threshold_report,
)
from .iterates import QuadratureSpec, second_iterate, third_iterate

__version__ = "0.1.0"

__all__ = [
    "CapwaveError",
    "ConfigError",
    "DispersionLaw",
    "QuadratureConvergenceError",
    "QuadratureSpec",
    "ScalingRecord",
    "SectorDatum",
    "SweepConfig",
    "apply_propagator",
    "datum_norm",
    "dno_selftest",
    "fit_exponent",
    "model_scaling_degrees",
    "output_region",
    "propagator_symbols",
    "records_to_csv",
    "records_to_json",
    "run_verify_suite",
    "scaling_sweep",
    "second_iterate",
    "third_iterate",
    "threshold_report",
]
