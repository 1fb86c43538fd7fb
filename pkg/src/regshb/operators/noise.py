"""Synthetic measurement noise."""
from __future__ import annotations

import enum

import numpy as np

from ..errors import ConfigError

__all__ = ["NoiseModel", "add_noise"]


class NoiseModel(str, enum.Enum):
    UNIFORM_SUP = "uniform_sup"
    GAUSSIAN_ABSOLUTE = "gaussian_absolute"
    GAUSSIAN_RELATIVE_BLOCK = "gaussian_relative_block"


def add_noise(clean, model, level: float, rng: np.random.Generator):
    """Perturb clean block data.

    Parameters
    ----------
    clean : ndarray or list of ndarray
        One entry per block; a 1-D array means scalar blocks.
    model : NoiseModel or str
        ``uniform_sup``: ``y_i + level |y|_inf eps_i`` with ``eps_i`` uniform
        on [-1, 1] (divided by ``sqrt(dim)`` for vector blocks so that
        ``|eps_i| <= 1``), ``delta_i = level |y|_inf``.
        ``gaussian_absolute``: ``y_i + level eps_i`` with standard normal
        entries, ``delta_i = level sqrt(dim)``.
        ``gaussian_relative_block``: ``y_i + level |y_i| u_i`` with ``u_i`` a
        uniformly random unit vector (a random sign for scalar blocks),
        ``delta_i = level |y_i|``.
    level : float
        Noise level, nonnegative.
    rng : numpy.random.Generator
        Noise stream.

    Returns
    -------
    noisy, deltas
        Noisy data in the layout of `clean` and the per-block noise levels.
    """
    if level < 0:
        raise ConfigError("noise level must be nonnegative")
    model = NoiseModel(model)
    scalar = isinstance(clean, np.ndarray) and clean.ndim == 1
    blocks = [np.atleast_1d(np.asarray(c, dtype=float)) for c in clean]
    n = len(blocks)
    deltas = np.zeros(n)
    noisy = []
    if model is NoiseModel.UNIFORM_SUP:
        sup = max(float(np.max(np.abs(b))) for b in blocks)
        for i, b in enumerate(blocks):
            eps = rng.uniform(-1.0, 1.0, size=b.shape) / np.sqrt(b.size)
            noisy.append(b + level * sup * eps)
            deltas[i] = level * sup
    elif model is NoiseModel.GAUSSIAN_ABSOLUTE:
        for i, b in enumerate(blocks):
            noisy.append(b + level * rng.standard_normal(b.shape))
            deltas[i] = level * np.sqrt(b.size)
    else:
        for i, b in enumerate(blocks):
            z = rng.standard_normal(b.shape)
            nz = np.linalg.norm(z)
            u = z / nz if nz > 0 else np.ones_like(z) / np.sqrt(z.size)
            nb = float(np.linalg.norm(b))
            noisy.append(b + level * nb * u)
            deltas[i] = level * nb
    if level == 0:
        noisy = blocks
    if scalar:
        return np.array([v[0] for v in noisy]), deltas
    return noisy, deltas
