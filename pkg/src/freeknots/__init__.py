"""Globally optimal least-squares broken lines (first-degree splines) with
free knots, found by exhaustive search over knot placements."""

from .assembly import Candidate, classify_knots, intersect_in_gap
from .dataset import DataError, DataSet, MedicalSeries, load_csv, medical_to_dataset, save_csv
from .lsq import BrokenLine, divided_differences, fit_fixed_knots, residual_norm
from .oracle import GridSpec, grid_oracle, nonuniqueness_family_residual
from .positions import (count_regular, count_superset, decode, encode,
                        enumerate_regular, is_regular)
from .report import fit_report, mbc_mic, to_json
from .search import FitResult, SearchOptions, backend_name, evaluate_vector, run_search
from .segmentation import segmentize

__version__ = "0.1.0"

__all__ = [
    "BrokenLine", "Candidate", "DataError", "DataSet", "FitResult", "GridSpec",
    "MedicalSeries", "SearchOptions", "backend_name", "classify_knots",
    "count_regular", "count_superset", "decode", "divided_differences",
    "encode", "enumerate_regular", "evaluate_vector", "fit_fixed_knots", "fit_report",
    "grid_oracle", "intersect_in_gap", "is_regular", "load_csv",
    "mbc_mic", "medical_to_dataset", "nonuniqueness_family_residual", "residual_norm",
    "run_search", "save_csv", "segmentize", "to_json",
]
