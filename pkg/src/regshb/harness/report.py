"""CSV and JSON reports of a sweep.

``results.csv`` has one row per (solver, level) with the columns in
:data:`CSV_COLUMNS`; floats are written in shortest round-trip form, so the
file parses back to the exact statistics.  ``time`` is the only
machine-dependent column.  ``results.json`` holds the per-trial samples and
boxplot summaries; wall times are kept under the separate ``timing`` key.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict

from .experiment import CellResult, ExperimentSpec
from .stats import boxplot_stats

__all__ = ["CSV_COLUMNS", "write_csv", "read_csv", "results_json", "write_json"]

CSV_COLUMNS = ("solver", "mode", "upsilon0", "upsilon1", "level", "trials",
               "safeguard_hits", "iter", "error", "time")


def _f(v: float) -> str:
    return repr(float(v))


def write_csv(path, spec: ExperimentSpec, cells: list[CellResult]) -> None:
    by_name = {s.name: s for s in spec.solvers}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in cells:
            e = by_name[c.solver]
            w.writerow([c.solver, e.mode.value, _f(e.cfg.upsilon0), _f(e.cfg.upsilon1),
                        _f(c.level), len(c.stats.samples), c.stats.safeguard_hits,
                        _f(c.stats.mean_iter), _f(c.stats.mean_sq_rel_error),
                        _f(c.stats.mean_wall_time)])


def read_csv(path) -> list[dict]:
    """Rows of a results CSV with numeric fields converted."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            for k in ("upsilon0", "upsilon1", "level", "iter", "error", "time"):
                row[k] = float(row[k])
            for k in ("trials", "safeguard_hits"):
                row[k] = int(row[k])
            out.append(row)
    return out


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def results_json(spec: ExperimentSpec, cells: list[CellResult]) -> dict:
    rows, timing = [], []
    for c in cells:
        samples = []
        for s in c.stats.samples:
            d = {k: _clean(v) for k, v in asdict(s).items() if k != "wall_time"}
            samples.append(d)
        errs = [s.error for s in c.stats.samples]
        done = [s.iterations for s in c.stats.samples if not s.safeguard_hit]
        rows.append({
            "solver": c.solver,
            "level": c.level,
            "mean_iter": _clean(c.stats.mean_iter),
            "mean_sq_rel_error": c.stats.mean_sq_rel_error,
            "safeguard_hits": c.stats.safeguard_hits,
            "samples": samples,
            "boxplot_error": asdict(boxplot_stats(errs)),
            "boxplot_iter": asdict(boxplot_stats(done)) if done else None,
        })
        timing.append({"solver": c.solver, "level": c.level,
                       "mean_wall_time": c.stats.mean_wall_time,
                       "wall_times": [s.wall_time for s in c.stats.samples]})
    return {"problem": spec.problem.kind, "noise_model": spec.noise_model.value,
            "trials": spec.trials, "base_seed": spec.base_seed,
            "cells": rows, "timing": timing}


def write_json(path, spec: ExperimentSpec, cells: list[CellResult]) -> None:
    with open(path, "w") as fh:
        json.dump(results_json(spec, cells), fh, indent=1)
        fh.write("\n")
