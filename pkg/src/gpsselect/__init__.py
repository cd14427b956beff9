"""Generalized path seeking with online degrees of freedom and Cp-type selection."""

from importlib.metadata import PackageNotFoundError, version as _version

from .criteria import CRITERIA, cross_validate, estimate_tau2, evaluate, select
from .dataset import (
    RawDataset,
    StandardizedDesign,
    TrueModel,
    destandardize,
    example_model,
    generate_gaussian,
    load_csv,
    load_diabetes,
    standardize,
)
from .dof import dense_series, df_series, monte_carlo_df, reduced_replay, zou_series
from .errors import DegenerateDataError, GPSSelectError, InputError, InternalError, NumericalError
from .path import PathOptions, SolutionPath, fit, ols_fit
from .penalty import PenaltySpec, gradient_abs, parse_penalty

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

__all__ = [
    "CRITERIA",
    "DegenerateDataError",
    "GPSSelectError",
    "InputError",
    "InternalError",
    "NumericalError",
    "PathOptions",
    "PenaltySpec",
    "RawDataset",
    "SolutionPath",
    "StandardizedDesign",
    "TrueModel",
    "cross_validate",
    "dense_series",
    "destandardize",
    "df_series",
    "estimate_tau2",
    "evaluate",
    "example_model",
    "fit",
    "generate_gaussian",
    "gradient_abs",
    "load_csv",
    "load_diabetes",
    "monte_carlo_df",
    "ols_fit",
    "parse_penalty",
    "reduced_replay",
    "select",
    "standardize",
    "zou_series",
]
