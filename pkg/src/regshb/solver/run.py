"""Driver loop and run records.

Trace formats
-------------
JSON lines: one object per step with keys ``index``, ``residual_norm``, ``t``,
``beta``, ``removed`` and ``active_size``, followed by one summary object with
``"summary": true``.  Floats are written in shortest round-trip form.

Binary: a little-endian structured array (see :data:`TRACE_DTYPE`), one
record per step.  For mini-batch runs ``index`` holds the first batch index.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ConfigError
from ..operators.system import ForwardSystem
from ..penalty import Penalty
from .config import Mode, Sampling, SolverConfig
from .sampling import IndexSampler, solver_stream
from .steps import (IterState, StepOutcome, delta_min, initial_state, minibatch_step,
                    shb_step)

__all__ = ["RunRecord", "run", "TRACE_DTYPE", "read_trace_binary"]

TRACE_DTYPE = np.dtype([("index", "<i8"), ("residual_norm", "<f8"), ("t", "<f8"),
                        ("beta", "<f8"), ("removed", "u1"), ("active_size", "<i8")])

Monitor = Callable[[IterState, StepOutcome, IterState], None]


@dataclass
class RunRecord:
    """Per-step trace and final iterate of one run.

    ``n_delta`` is the stopping index, or ``None`` when the run ended on the
    iteration cap (``stop_reason`` is then ``"safeguard"``, or ``"horizon"``
    for exact-data runs, which have no stopping rule).
    """

    mode: str
    index: list = field(default_factory=list)
    residual_norm: list = field(default_factory=list)
    t: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    removed: list = field(default_factory=list)
    active_size: list = field(default_factory=list)
    n_delta: int | None = None
    stop_reason: str = ""
    iterations: int = 0
    final_x: np.ndarray | None = None
    final_xi: np.ndarray | None = None
    wall_time: float = 0.0

    @property
    def safeguard_hit(self) -> bool:
        return self.stop_reason == "safeguard"

    @property
    def outcomes(self) -> list[dict]:
        keys = ("index", "residual_norm", "t", "beta", "removed", "active_size")
        cols = [getattr(self, k) for k in keys]
        return [dict(zip(keys, row)) for row in zip(*cols)]

    def summary(self) -> dict:
        return {"summary": True, "mode": self.mode, "n_delta": self.n_delta,
                "stop_reason": self.stop_reason, "iterations": self.iterations}

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for row in self.outcomes:
                if isinstance(row["index"], tuple):
                    row["index"] = list(row["index"])
                fh.write(json.dumps(row) + "\n")
            fh.write(json.dumps(self.summary()) + "\n")

    def to_binary(self) -> np.ndarray:
        arr = np.zeros(len(self.t), dtype=TRACE_DTYPE)
        arr["index"] = [i[0] if isinstance(i, tuple) else i for i in self.index]
        arr["residual_norm"] = self.residual_norm
        arr["t"] = self.t
        arr["beta"] = self.beta
        arr["removed"] = self.removed
        arr["active_size"] = self.active_size
        return arr

    def write_binary(self, path) -> None:
        self.to_binary().tofile(path)


def read_trace_binary(path) -> np.ndarray:
    return np.fromfile(path, dtype=TRACE_DTYPE)


def run(system: ForwardSystem, penalty: Penalty, cfg: SolverConfig, mode: Mode = Mode.SHB,
        rng: np.random.Generator | None = None, monitor: Monitor | None = None,
        trace: bool = True) -> RunRecord:
    """Iterate from ``xi_0 = cfg.xi0`` until the active set is empty.

    Parameters
    ----------
    system, penalty
        Problem with data attached, and the convex penalty.
    cfg : SolverConfig
        Validated against ``penalty.sigma`` before the first step.
    mode : Mode
        ``exact`` runs exactly ``cfg.iteration_cap`` steps with full-set
        sampling; all other modes stop when the active set empties.
    rng : numpy.random.Generator, optional
        Index stream; defaults to one seeded from ``cfg.seed``.
    monitor : callable, optional
        Called as ``monitor(prev_state, outcome, new_state)`` after each step.
    trace : bool
        Record per-step outcomes.
    """
    mode = Mode(mode)
    cfg.validate(penalty.sigma, system.n_blocks)
    if not mode.batched and cfg.batch != 1:
        raise ConfigError("batch: single-index modes need batch = 1")
    sampler = IndexSampler(rng if rng is not None else solver_stream(cfg.seed))
    cap = cfg.iteration_cap(mode)
    full = mode is Mode.EXACT or cfg.sampling is Sampling.FULL
    stopping = mode is not Mode.EXACT
    n_blocks = system.n_blocks
    gate = delta_min(system.noise_levels)
    momentum = mode is Mode.MINIBATCH

    rec = RunRecord(mode.value)
    state = initial_state(system, penalty, cfg.xi0)
    active = state.active
    started = time.perf_counter()
    while state.n < cap:
        if stopping and len(active) == 0:
            break
        if mode.batched:
            if full:
                batch = sampler.subset(range(n_blocks), cfg.batch)
            else:
                batch = active.draw_batch(sampler, cfg.batch)
            new, out = minibatch_step(state, batch, system, penalty, cfg, momentum, gate)
        else:
            i = sampler.below(n_blocks) if full else active.draw(sampler)
            new, out = shb_step(state, i, system, penalty, cfg, mode)
        if trace:
            rec.index.append(out.index)
            rec.residual_norm.append(out.residual_norm)
            rec.t.append(out.t)
            rec.beta.append(out.beta)
            rec.removed.append(out.removed)
            rec.active_size.append(out.active_size)
        if monitor is not None:
            monitor(state, out, new)
        state = new
    rec.wall_time = time.perf_counter() - started
    rec.iterations = state.n
    if not stopping:
        rec.stop_reason = "horizon"
    elif len(active) == 0:
        rec.stop_reason = "stopping_rule"
        rec.n_delta = state.n
    else:
        rec.stop_reason = "safeguard"
    rec.final_x = state.x
    rec.final_xi = state.xi
    return rec
