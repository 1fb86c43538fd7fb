"""Forward models, problem generators and noise."""
from .fredholm import exact_solution, fredholm_build, kernel
from .noise import NoiseModel, add_noise
from .phantom import schlieren_phantom, shepp_logan
from .schlieren import SchlierenSystem, h1_inner, helmholtz_solve, schlieren_build
from .system import Block, ForwardSystem, GroundTruth, MatrixSystem, duality_map
from .tomo import ray_intersections, ray_matrix, tomo_build

__all__ = [
    "Block", "ForwardSystem", "GroundTruth", "MatrixSystem", "duality_map",
    "kernel", "exact_solution", "fredholm_build",
    "shepp_logan", "schlieren_phantom",
    "ray_intersections", "ray_matrix", "tomo_build",
    "SchlierenSystem", "helmholtz_solve", "h1_inner", "schlieren_build",
    "NoiseModel", "add_noise",
]
