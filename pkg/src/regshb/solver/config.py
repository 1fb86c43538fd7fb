"""Solver parameters and iteration modes."""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

from ..errors import ConfigError

__all__ = ["Mode", "Sampling", "SolverConfig"]


class Mode(str, enum.Enum):
    SHB = "shb"                      # adaptive SHB, noisy data, index-set stopping
    EXACT = "exact"                  # adaptive SHB, exact data, fixed horizon
    SGD = "sgd"                      # no momentum, remove on t = 0
    MINIBATCH = "minibatch"          # mini-batch SHB
    MINIBATCH_SGD = "minibatch_sgd"  # mini-batch without momentum

    @property
    def batched(self) -> bool:
        return self in (Mode.MINIBATCH, Mode.MINIBATCH_SGD)

    @property
    def momentum(self) -> bool:
        return self in (Mode.SHB, Mode.EXACT, Mode.MINIBATCH)


class Sampling(str, enum.Enum):
    ACTIVE = "active"  # draw from the current index set
    FULL = "full"      # draw from {0..N-1}


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the adaptive SHB/SGD iteration.

    ``max_iters=None`` selects 10**7 for single-index modes and 10**6 for the
    mini-batch modes.  ``xi0`` is the constant initial dual iterate.
    """

    mu0: float = 0.7
    mu1: float = 1e4
    tau: float = 1.2
    upsilon0: float = 1e-6
    upsilon1: float = 1e-5
    beta_cap: float = 0.99
    eta: float = 0.0
    r: float = 2.0
    batch: int = 1
    sampling: Sampling = Sampling.ACTIVE
    max_iters: int | None = None
    seed: int = 0
    xi0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sampling", Sampling(self.sampling))

    def replace(self, **kw) -> "SolverConfig":
        return dataclasses.replace(self, **kw)

    def iteration_cap(self, mode: Mode) -> int:
        if self.max_iters is not None:
            return int(self.max_iters)
        return 10 ** 6 if Mode(mode).batched else 10 ** 7

    def validate(self, sigma: float, n_blocks: int | None = None) -> None:
        """Raise :class:`ConfigError` naming the violated constraint."""
        def bad(key, msg):
            raise ConfigError(f"{key}: {msg}")

        for key in ("mu0", "mu1", "tau", "upsilon0", "upsilon1", "eta", "r", "xi0"):
            if not math.isfinite(getattr(self, key)):
                bad(key, "must be finite")
        if not 0 < self.mu0 < 4 * sigma:
            bad("mu0", f"need 0 < mu0 < 4*sigma = {4 * sigma:g}")
        if not self.mu1 > 0:
            bad("mu1", "need mu1 > 0")
        if not 0 <= self.eta < 1:
            bad("eta", "need 0 <= eta < 1")
        if not self.tau > (1 + self.eta) / (1 - self.eta):
            bad("tau", f"need tau > (1+eta)/(1-eta) = {(1 + self.eta) / (1 - self.eta):g}")
        if not self.upsilon0 > 0:
            bad("upsilon0", "need upsilon0 > 0")
        if not self.upsilon1 > 0:
            bad("upsilon1", "need upsilon1 > 0")
        if not 0 <= self.beta_cap < 1:
            bad("beta_cap", "need 0 <= beta_cap < 1")
        if not self.r > 1:
            bad("r", "need r > 1")
        if self.batch < 1:
            bad("batch", "need batch >= 1")
        if n_blocks is not None and self.batch > n_blocks:
            bad("batch", f"batch size exceeds the number of equations ({n_blocks})")
        if self.max_iters is not None and self.max_iters < 1:
            bad("max_iters", "need max_iters >= 1")
        if not 0 <= self.seed < 2 ** 64:
            bad("seed", "need an unsigned 64-bit seed")
