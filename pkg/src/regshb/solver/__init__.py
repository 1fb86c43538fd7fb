"""Adaptive stochastic heavy ball iteration and its variants."""
from .config import Mode, Sampling, SolverConfig
from .rules import descent_weight, gamma_update, momentum_coeff, step_size_exact, step_size_noisy
from .run import TRACE_DTYPE, RunRecord, read_trace_binary, run
from .sampling import ActiveSet, IndexSampler, solver_stream
from .steps import (IterState, StepOutcome, delta_min, initial_state, minibatch_step,
                    sgd_step, shb_step)

__all__ = [
    "Mode", "Sampling", "SolverConfig",
    "step_size_noisy", "step_size_exact", "gamma_update", "momentum_coeff", "descent_weight",
    "IterState", "StepOutcome", "initial_state", "shb_step", "sgd_step", "minibatch_step",
    "delta_min", "ActiveSet", "IndexSampler", "solver_stream",
    "RunRecord", "run", "TRACE_DTYPE", "read_trace_binary",
]
