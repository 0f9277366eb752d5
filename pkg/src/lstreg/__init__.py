"""Robust linear regression by least squares of depth-trimmed residuals."""

__version__ = "0.1.0"

from .core import Dataset, TrimmedFit, residuals
from .errors import (AllCandidatesSkippedError, ConfigurationError, ContractViolation,
                     DegenerateDesignError, DegenerateScaleError, FormatError, LstRegError,
                     ParseError, UnsampleableDesignError)
from .ingest import ColumnSpec, load_csv, save_csv
from .lst import LstConfig, candidate_betas, index_set, lst_fit, objective_q
from .lts import LtsConfig, lts_fit, lts_objective
from .ols import LsSolution, ls_estimate, ls_fit
from .robust_stats import mad, median, outlyingness
from .simharness import MetricsTable, SimulationScenario, run_study

__all__ = [
    "Dataset", "TrimmedFit", "residuals",
    "LstRegError", "ContractViolation", "ConfigurationError", "DegenerateScaleError",
    "UnsampleableDesignError", "AllCandidatesSkippedError", "DegenerateDesignError",
    "FormatError", "ParseError",
    "ColumnSpec", "load_csv", "save_csv",
    "LstConfig", "candidate_betas", "index_set", "lst_fit", "objective_q",
    "LtsConfig", "lts_fit", "lts_objective",
    "LsSolution", "ls_estimate", "ls_fit",
    "mad", "median", "outlyingness",
    "MetricsTable", "SimulationScenario", "run_study",
]
