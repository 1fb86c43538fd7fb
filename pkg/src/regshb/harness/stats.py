"""Error metric, per-cell trial statistics and boxplot summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError

__all__ = ["relative_error", "TrialResult", "TrialStats", "BoxplotSummary", "boxplot_stats"]


def relative_error(x, x_dagger) -> float:
    """``|x - x_dagger|^2 / |x_dagger|^2``."""
    x = np.ravel(np.asarray(x, dtype=float))
    x_dagger = np.ravel(np.asarray(x_dagger, dtype=float))
    if x.shape != x_dagger.shape:
        raise InputError("shapes of x and x_dagger differ")
    ref = float(np.dot(x_dagger, x_dagger))
    if ref == 0.0:
        raise InputError("x_dagger is zero")
    d = x - x_dagger
    return float(np.dot(d, d)) / ref


@dataclass(frozen=True)
class TrialResult:
    """One run.  ``discrepancy_ok`` records the full residual re-check at the
    final iterate (``None`` if the run stopped on the safeguard)."""

    trial: int
    iterations: int
    n_delta: int | None
    error: float
    wall_time: float
    stop_reason: str
    discrepancy_ok: bool | None
    max_residual_ratio: float

    @property
    def safeguard_hit(self) -> bool:
        return self.stop_reason == "safeguard"


@dataclass(frozen=True)
class TrialStats:
    """Means over the trials of one (solver, level) cell.

    Trials that hit the safeguard count in ``mean_sq_rel_error`` and
    ``mean_wall_time`` but not in ``mean_iter``.
    """

    mean_iter: float
    mean_wall_time: float
    mean_sq_rel_error: float
    samples: tuple[TrialResult, ...] = field(default=())

    @classmethod
    def from_samples(cls, samples) -> "TrialStats":
        samples = tuple(sorted(samples, key=lambda s: s.trial))
        if not samples:
            raise InputError("no trials")
        done = [s.iterations for s in samples if not s.safeguard_hit]
        mean_iter = math.fsum(done) / len(done) if done else math.nan
        return cls(mean_iter,
                   math.fsum(s.wall_time for s in samples) / len(samples),
                   math.fsum(s.error for s in samples) / len(samples),
                   samples)

    @property
    def safeguard_hits(self) -> int:
        return sum(s.safeguard_hit for s in self.samples)


@dataclass(frozen=True)
class BoxplotSummary:
    median: float
    q25: float
    q75: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple[float, ...]


def boxplot_stats(samples) -> BoxplotSummary:
    """Quartiles by linear interpolation; whiskers at the most extreme samples
    within 1.5 IQR of the box, everything beyond listed as an outlier."""
    a = np.sort(np.asarray(samples, dtype=float).ravel())
    if a.size == 0:
        raise InputError("boxplot of an empty sample")
    q25, med, q75 = (float(v) for v in np.percentile(a, [25, 50, 75]))
    iqr = q75 - q25
    lo_fence, hi_fence = q25 - 1.5 * iqr, q75 + 1.5 * iqr
    inside = a[(a >= lo_fence) & (a <= hi_fence)]
    outliers = tuple(float(v) for v in a[(a < lo_fence) | (a > hi_fence)])
    return BoxplotSummary(med, q25, q75, float(inside.min()), float(inside.max()), outliers)
