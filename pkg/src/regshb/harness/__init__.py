"""Noise sweeps, Monte-Carlo trials and their statistics."""
from .experiment import (CellResult, ExperimentSpec, SolverEntry, default_workers,
                         discrepancy_check, make_data, monte_carlo, run_trial)
from .problems import FredholmProblem, SchlierenProblem, TomoProblem, build
from .report import CSV_COLUMNS, read_csv, results_json, write_csv, write_json
from .stats import BoxplotSummary, TrialResult, TrialStats, boxplot_stats, relative_error

__all__ = [
    "CellResult", "ExperimentSpec", "SolverEntry", "default_workers", "discrepancy_check",
    "make_data", "monte_carlo", "run_trial",
    "FredholmProblem", "TomoProblem", "SchlierenProblem", "build",
    "CSV_COLUMNS", "read_csv", "results_json", "write_csv", "write_json",
    "BoxplotSummary", "TrialResult", "TrialStats", "boxplot_stats", "relative_error",
]
