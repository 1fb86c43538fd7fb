"""Monte-Carlo sweeps over noise levels and solver configurations.

Every trial owns two streams derived from ``base_seed`` by seed-sequence
spawning: key ``(level, trial, 0)`` draws the noise and ``(level, trial, 1)``
the indices.  All solver configurations of a trial therefore see the same
noisy data, and results do not depend on the number of workers.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..operators import NoiseModel, add_noise
from ..solver import Mode, SolverConfig, run, solver_stream
from .problems import Problem, build
from .stats import TrialResult, TrialStats, relative_error

__all__ = ["SolverEntry", "ExperimentSpec", "CellResult", "make_data", "run_trial",
           "monte_carlo", "discrepancy_check"]


@dataclass(frozen=True)
class SolverEntry:
    name: str
    mode: Mode
    cfg: SolverConfig


@dataclass(frozen=True)
class ExperimentSpec:
    problem: Problem
    noise_model: NoiseModel
    levels: tuple[float, ...]
    solvers: tuple[SolverEntry, ...]
    trials: int = 1
    base_seed: int = 0
    fixed_noise: bool = False

    def validate(self) -> None:
        self.problem.validate()
        if self.trials < 1:
            raise ConfigError("trials: need trials >= 1")
        if not self.levels:
            raise ConfigError("levels: need at least one noise level")
        if any(not (lvl >= 0 and math.isfinite(lvl)) for lvl in self.levels):
            raise ConfigError("levels: noise levels must be finite and nonnegative")
        if not self.solvers:
            raise ConfigError("solvers: need at least one solver")
        names = [s.name for s in self.solvers]
        if len(set(names)) != len(names):
            raise ConfigError("solvers: names must be unique")
        system, _ = build(self.problem)
        sigma = self.problem.penalty().sigma
        for s in self.solvers:
            try:
                s.cfg.validate(sigma, system.n_blocks)
            except ConfigError as e:
                raise ConfigError(f"solvers.{s.name}.{e}") from None
            if not Mode(s.mode).batched and s.cfg.batch != 1:
                raise ConfigError(f"solvers.{s.name}.batch: single-index mode needs batch = 1")


@dataclass(frozen=True)
class CellResult:
    solver: str
    level: float
    stats: TrialStats


def make_data(problem: Problem, noise_model, level: float, seed: int, level_idx: int,
              trial: int):
    """Noisy system for one trial."""
    system, truth = build(problem)
    y, deltas = add_noise(truth.clean_data, noise_model, level,
                          solver_stream(seed, level_idx, trial, 0))
    return system.with_data(y, deltas), truth


def discrepancy_check(system, x, tau: float) -> tuple[bool, float]:
    """Re-evaluate every residual at `x`; returns whether all satisfy
    ``|F_i(x) - y_i| <= tau delta_i`` and the largest ratio to ``tau delta_i``.

    A relative slack of 1e-9 absorbs the rounding difference between the
    full and the per-row evaluation.
    """
    res = system.residual_norms(x)
    bound = tau * system.noise_levels
    ok = bool(np.all(res <= bound * (1 + 1e-9) + 1e-300))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, res / bound, np.where(res > 0, np.inf, 0.0))
    return ok, float(np.max(ratio))


def run_trial(problem: Problem, noise_model, level: float, level_idx: int, trial: int,
              entry: SolverEntry, seed: int, fixed_noise: bool = False) -> TrialResult:
    noise_trial = 0 if fixed_noise else trial
    system, truth = make_data(problem, noise_model, level, seed, level_idx, noise_trial)
    rec = run(system, problem.penalty(), entry.cfg, entry.mode,
              rng=solver_stream(seed, level_idx, trial, 1), trace=False)
    if rec.stop_reason == "stopping_rule":
        ok, ratio = discrepancy_check(system, rec.final_x, entry.cfg.tau)
    else:
        ok, ratio = None, math.nan
    return TrialResult(trial, rec.iterations, rec.n_delta,
                       relative_error(rec.final_x, truth.x_dagger), rec.wall_time,
                       rec.stop_reason, ok, ratio)


def _task(args):
    key, spec, li, trial, entry = args
    return key, run_trial(spec.problem, spec.noise_model, spec.levels[li], li, trial,
                          entry, spec.base_seed, spec.fixed_noise)


def default_workers() -> int:
    env = os.environ.get("REG_SHB_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def monte_carlo(spec: ExperimentSpec, workers: int = 1) -> list[CellResult]:
    """Run every (solver, level, trial) and aggregate per (solver, level).

    Cells are returned solver-major, levels in the given order.
    """
    spec.validate()
    tasks = [((si, li), spec, li, trial, entry)
             for si, entry in enumerate(spec.solvers)
             for li in range(len(spec.levels))
             for trial in range(spec.trials)]
    if workers <= 1:
        results = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    cells: dict = {}
    for key, res in results:
        cells.setdefault(key, []).append(res)
    return [CellResult(entry.name, spec.levels[li], TrialStats.from_samples(cells[(si, li)]))
            for si, entry in enumerate(spec.solvers)
            for li in range(len(spec.levels))]
