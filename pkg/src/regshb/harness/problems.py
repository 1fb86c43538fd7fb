"""The three benchmark problems with their penalties and noise models."""
from __future__ import annotations

import functools
from dataclasses import dataclass

from ..errors import ConfigError
from ..operators import NoiseModel, fredholm_build, schlieren_build, tomo_build
from ..penalty import ConstrainedQuadratic, TVQuadratic

__all__ = ["FredholmProblem", "TomoProblem", "SchlierenProblem", "Problem", "build"]


@dataclass(frozen=True)
class FredholmProblem:
    n: int = 300
    kind = "fredholm"
    noise_model = NoiseModel.UNIFORM_SUP

    def penalty(self):
        return ConstrainedQuadratic()

    def validate(self):
        if self.n < 2:
            raise ConfigError("problem.n: need n >= 2")


@dataclass(frozen=True)
class TomoProblem:
    grid_n: int = 128
    n_angles: int = 45
    n_rays: int = 360
    modified_phantom: bool = False
    kind = "tomo"
    noise_model = NoiseModel.GAUSSIAN_ABSOLUTE

    def penalty(self):
        return ConstrainedQuadratic()

    def validate(self):
        if self.grid_n < 8:
            raise ConfigError("problem.grid_n: need grid_n >= 8")
        if self.n_angles < 1 or self.n_rays < 1:
            raise ConfigError("problem.n_angles/n_rays: need at least one")


@dataclass(frozen=True)
class SchlierenProblem:
    grid_n: int = 110
    n_dirs: int = 60
    eta: float = 0.01
    lam: float = 1.0
    kind = "schlieren"
    noise_model = NoiseModel.GAUSSIAN_RELATIVE_BLOCK

    def penalty(self):
        return TVQuadratic(self.lam, (self.grid_n, self.grid_n))

    def validate(self):
        if self.grid_n < 16:
            raise ConfigError("problem.grid_n: need grid_n >= 16")
        if self.n_dirs < 1:
            raise ConfigError("problem.n_dirs: need n_dirs >= 1")
        if not 0 <= self.eta < 1:
            raise ConfigError("problem.eta: need 0 <= eta < 1")
        if not self.lam > 0:
            raise ConfigError("problem.lam: need lam > 0")


Problem = FredholmProblem | TomoProblem | SchlierenProblem


@functools.lru_cache(maxsize=4)
def build(problem: Problem):
    """System (without noisy data) and ground truth; cached per process."""
    problem.validate()
    if isinstance(problem, FredholmProblem):
        return fredholm_build(problem.n)
    if isinstance(problem, TomoProblem):
        return tomo_build(problem.grid_n, problem.n_angles, problem.n_rays,
                          problem.modified_phantom)
    return schlieren_build(problem.grid_n, problem.n_dirs, problem.eta)
