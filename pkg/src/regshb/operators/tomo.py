"""Parallel-beam ray tracing on a square pixel grid.

Pixels are stored row-major with row index increasing in y, matching
:func:`~regshb.operators.phantom.pixel_centers`.  A ray with angle ``theta``
and detector offset ``s`` is the line ``s * (cos, sin) + r * (-sin, cos)``.
Intersection lengths are computed exactly (Siddon's method).
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError
from .phantom import shepp_logan
from .system import GroundTruth, MatrixSystem

__all__ = ["ray_intersections", "ray_matrix", "tomo_build"]


def _axis_window(p0, d, lo, hi):
    """Parameter interval where ``p0 + r d`` lies in [lo, hi)."""
    if d == 0.0:
        if lo <= p0 < hi:
            return -np.inf, np.inf
        return np.inf, -np.inf
    a, b = (lo - p0) / d, (hi - p0) / d
    return min(a, b), max(a, b)


def ray_intersections(theta: float, s: float, n: int, side: float):
    """Pixel indices and intersection lengths of one ray.

    Parameters
    ----------
    theta : float
        Ray normal angle in radians.
    s : float
        Signed offset of the ray from the grid center.
    n : int
        Pixels per side.
    side : float
        Physical side length of the square grid, centred at the origin.
    """
    half = side / 2.0
    h = side / n
    c, sn = np.cos(theta), np.sin(theta)
    # snap round-off so axis-aligned rays stay axis-aligned
    c = 0.0 if abs(c) < 1e-14 else c
    sn = 0.0 if abs(sn) < 1e-14 else sn
    px, py = s * c, s * sn
    dx, dy = -sn, c

    ax0, ax1 = _axis_window(px, dx, -half, half)
    ay0, ay1 = _axis_window(py, dy, -half, half)
    r0, r1 = max(ax0, ay0), min(ax1, ay1)
    if not r1 > r0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)

    lines = -half + h * np.arange(n + 1)
    parts = [np.array([r0, r1])]
    if dx != 0.0:
        parts.append((lines - px) / dx)
    if dy != 0.0:
        parts.append((lines - py) / dy)
    rs = np.concatenate(parts)
    rs = np.unique(rs[(rs >= r0) & (rs <= r1)])
    lengths = np.diff(rs)
    mid = 0.5 * (rs[:-1] + rs[1:])
    col = np.clip(np.floor((px + mid * dx + half) / h).astype(np.int64), 0, n - 1)
    row = np.clip(np.floor((py + mid * dy + half) / h).astype(np.int64), 0, n - 1)
    keep = lengths > 1e-12 * h
    return (row * n + col)[keep], lengths[keep]


def ray_matrix(thetas, offsets, n: int, side: float) -> sp.csr_matrix:
    """Sparse matrix with one row per (theta, offset) pair, angle-major."""
    indptr = [0]
    indices = []
    data = []
    for th in thetas:
        for s in offsets:
            idx, ln = ray_intersections(float(th), float(s), n, side)
            # merge duplicates (a pixel can be hit by two adjacent segments)
            if idx.size:
                uniq, inv = np.unique(idx, return_inverse=True)
                ln = np.bincount(inv, weights=ln)
                idx = uniq
            indices.append(idx)
            data.append(ln)
            indptr.append(indptr[-1] + idx.size)
    return sp.csr_matrix(
        (np.concatenate(data) if data else np.zeros(0),
         np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64),
         np.asarray(indptr)),
        shape=(len(thetas) * len(offsets), n * n))


def tomo_geometry(grid_n: int, n_angles: int, n_rays: int):
    """Angles equally spaced over 180 degrees and detector offsets spanning
    the grid diagonal, in pixel units."""
    thetas = np.arange(n_angles) * (np.pi / n_angles)
    width = np.sqrt(2.0) * grid_n
    offsets = np.linspace(-width / 2.0, width / 2.0, n_rays)
    return thetas, offsets


def tomo_build(grid_n: int = 128, n_angles: int = 45, n_rays: int = 360,
               modified_phantom: bool = False) -> tuple[MatrixSystem, GroundTruth]:
    """Parallel-beam CT system, one scalar equation per ray.

    The image occupies a square of side `grid_n` (unit pixels); the exact
    solution is the Shepp-Logan phantom.  The defaults give a 16200 x 16384
    system.
    """
    if grid_n < 8:
        raise ConfigError("grid_n must be at least 8")
    if n_angles < 1 or n_rays < 1:
        raise ConfigError("need at least one angle and one ray")
    thetas, offsets = tomo_geometry(grid_n, n_angles, n_rays)
    A = ray_matrix(thetas, offsets, grid_n, float(grid_n))
    system = MatrixSystem(A, domain_shape=(grid_n, grid_n))
    truth = GroundTruth.from_system(system, shepp_logan(grid_n, modified_phantom))
    return system, truth
