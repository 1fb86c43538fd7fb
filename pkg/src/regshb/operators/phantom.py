"""Shepp-Logan phantom and the piecewise-constant schlieren phantom."""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError

__all__ = ["SHEPP_LOGAN", "MODIFIED_SHEPP_LOGAN", "pixel_centers",
           "shepp_logan", "schlieren_phantom"]

# (intensity, semi-axis a, semi-axis b, x0, y0, rotation in degrees)
SHEPP_LOGAN = (
    (1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
)

MODIFIED_SHEPP_LOGAN = tuple(
    (v,) + e[1:] for v, e in zip((1.0, -0.8, -0.2, -0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1),
                                 SHEPP_LOGAN))


def pixel_centers(n: int, half_width: float = 1.0):
    """Center coordinates ``(X, Y)`` of an n x n grid on
    ``[-half_width, half_width]^2``; row index increases with y."""
    c = -half_width + (np.arange(n) + 0.5) * (2.0 * half_width / n)
    X, Y = np.meshgrid(c, c)
    return X, Y


def shepp_logan(grid_n: int, modified: bool = False) -> np.ndarray:
    """Ten-ellipse Shepp-Logan phantom on a ``grid_n x grid_n`` grid.

    Pixel values are the summed intensities of the ellipses covering the pixel
    center, clipped to [0, 1] to remove rounding residue.
    """
    if grid_n < 8:
        raise ConfigError("grid_n must be at least 8")
    table = MODIFIED_SHEPP_LOGAN if modified else SHEPP_LOGAN
    X, Y = pixel_centers(grid_n)
    img = np.zeros((grid_n, grid_n))
    for val, a, b, x0, y0, phi in table:
        th = np.deg2rad(phi)
        c, s = np.cos(th), np.sin(th)
        u = (X - x0) * c + (Y - y0) * s
        v = -(X - x0) * s + (Y - y0) * c
        img[(u / a) ** 2 + (v / b) ** 2 <= 1.0] += val
    return np.clip(img, 0.0, 1.0)


def schlieren_phantom(grid_n: int) -> np.ndarray:
    """Piecewise-constant test object on ``[-1, 1]^2``.

    A disk of height 1 centred at (-0.3, 0.25) with radius 0.22, a disk of
    height 0.8 at (0.35, 0.45) with radius 0.12, and the right half
    (x > 0.15) of an annulus centred at (0.15, -0.15) with radii 0.3 and
    0.5 at height 0.6.  Everything lies inside the disk of radius 0.85, so
    the object vanishes near the boundary of the square.
    """
    X, Y = pixel_centers(grid_n)
    img = np.zeros((grid_n, grid_n))
    img[(X + 0.3) ** 2 + (Y - 0.25) ** 2 <= 0.22 ** 2] = 1.0
    img[(X - 0.35) ** 2 + (Y - 0.45) ** 2 <= 0.12 ** 2] = 0.8
    rr = np.hypot(X - 0.15, Y + 0.15)
    img[(rr >= 0.3) & (rr <= 0.5) & (X > 0.15)] = 0.6
    return img
