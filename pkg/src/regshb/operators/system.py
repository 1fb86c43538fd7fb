"""Systems of operator equations ``F_i(x) = y_i``, ``i = 0..N-1``.

A :class:`ForwardSystem` owns the N forward maps together with the data
``y_i^delta`` and the noise levels ``delta_i``.  Systems are immutable; use
:meth:`ForwardSystem.with_data` to attach a different data set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError, InputError

__all__ = [
    "duality_map",
    "Block",
    "ForwardSystem",
    "MatrixSystem",
    "GroundTruth",
]


def duality_map(y: np.ndarray, r: float) -> np.ndarray:
    """Duality mapping with gauge ``t -> t^(r-1)`` on a Hilbert space:
    ``|y|^(r-2) y`` (and 0 at ``y = 0``)."""
    if not r > 1:
        raise ConfigError("duality map exponent r must exceed 1")
    y = np.asarray(y, dtype=float)
    if r == 2:
        return y
    nrm = math.sqrt(float(np.dot(y, y)))
    if nrm == 0.0:
        return np.zeros_like(y)
    return nrm ** (r - 2.0) * y


@dataclass(frozen=True)
class Block:
    """One equation of a system, as seen by a caller."""

    apply: Callable[[np.ndarray], np.ndarray]
    linearize: Callable[[np.ndarray, np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray, np.ndarray], np.ndarray]
    data: np.ndarray
    noise_level: float
    residual_dim: int


class ForwardSystem:
    """Base class: N equation blocks over a common domain grid.

    Subclasses implement :meth:`apply`, :meth:`linearize` and :meth:`adjoint`
    for a single block index; the batched helpers loop by default.
    """

    linear = False

    def __init__(self, n_blocks: int, domain_shape: tuple[int, ...], eta: float = 0.0,
                 data: Sequence[np.ndarray] | np.ndarray | None = None,
                 noise_levels: np.ndarray | None = None):
        if n_blocks < 1:
            raise ConfigError("a system needs at least one block")
        if not 0.0 <= eta < 1.0:
            raise ConfigError("eta must lie in [0, 1)")
        self.n_blocks = int(n_blocks)
        self.domain_shape = tuple(int(s) for s in domain_shape)
        self.eta = float(eta)
        self.data = data
        if noise_levels is None:
            noise_levels = np.zeros(self.n_blocks)
        self.noise_levels = np.asarray(noise_levels, dtype=float)
        if self.noise_levels.shape != (self.n_blocks,):
            raise InputError("need one noise level per block")

    @property
    def size(self) -> int:
        return int(np.prod(self.domain_shape))

    def residual_dim(self, i: int) -> int:
        raise NotImplementedError

    def apply(self, i: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def linearize(self, i: int, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, i: int, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def copy_with(self, **kw) -> "ForwardSystem":
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        new.__dict__.update(kw)
        return new

    def with_data(self, data, noise_levels) -> "ForwardSystem":
        noise_levels = np.asarray(noise_levels, dtype=float)
        if noise_levels.shape != (self.n_blocks,):
            raise InputError("need one noise level per block")
        return self.copy_with(data=data, noise_levels=noise_levels)

    def residual(self, i: int, x: np.ndarray) -> np.ndarray:
        return self.apply(i, x) - self.data[i]

    def residuals(self, idx: Sequence[int], x: np.ndarray) -> list[np.ndarray]:
        return [self.residual(i, x) for i in idx]

    def adjoint_sum(self, idx: Sequence[int], x: np.ndarray,
                    ws: Sequence[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.size)
        for i, w in zip(idx, ws):
            out += self.adjoint(i, x, w)
        return out

    def apply_all(self, x: np.ndarray) -> list[np.ndarray]:
        return [self.apply(i, x) for i in range(self.n_blocks)]

    def residual_norms(self, x: np.ndarray) -> np.ndarray:
        """``|F_i(x) - y_i^delta|`` for every block."""
        return np.array([np.linalg.norm(r) for r in
                         self.residuals(range(self.n_blocks), x)])

    def block(self, i: int) -> Block:
        if not 0 <= i < self.n_blocks:
            raise IndexError(f"block index {i} out of range")
        return Block(
            apply=lambda x, i=i: self.apply(i, x),
            linearize=lambda x, h, i=i: self.linearize(i, x, h),
            adjoint=lambda x, w, i=i: self.adjoint(i, x, w),
            data=None if self.data is None else np.atleast_1d(self.data[i]),
            noise_level=float(self.noise_levels[i]),
            residual_dim=self.residual_dim(i),
        )

    @property
    def blocks(self) -> list[Block]:
        return [self.block(i) for i in range(self.n_blocks)]


class MatrixSystem(ForwardSystem):
    """Linear system whose i-th block is the scalar equation ``A[i] @ x``.

    `matrix` may be a dense ndarray or a scipy sparse matrix (kept in CSR).
    Data is a 1-D array of length N.
    """

    linear = True

    def __init__(self, matrix, domain_shape=None, data=None, noise_levels=None):
        if sp.issparse(matrix):
            matrix = sp.csr_matrix(matrix, dtype=float)
        else:
            matrix = np.ascontiguousarray(matrix, dtype=float)
        if domain_shape is None:
            domain_shape = (matrix.shape[1],)
        super().__init__(matrix.shape[0], domain_shape, 0.0, None, noise_levels)
        if int(np.prod(self.domain_shape)) != matrix.shape[1]:
            raise InputError("domain shape does not match matrix columns")
        self.matrix = matrix
        self.sparse = sp.issparse(matrix)
        if data is not None:
            self.data = np.asarray(data, dtype=float)

    def with_data(self, data, noise_levels):
        data = np.asarray(data, dtype=float).reshape(self.n_blocks)
        return super().with_data(data, noise_levels)

    def residual_dim(self, i):
        return 1

    def _row(self, i):
        if self.sparse:
            m = self.matrix
            lo, hi = m.indptr[i], m.indptr[i + 1]
            row = np.zeros(m.shape[1])
            row[m.indices[lo:hi]] = m.data[lo:hi]
            return row
        return self.matrix[i]

    def _dot_row(self, i, x):
        if self.sparse:
            m = self.matrix
            lo, hi = m.indptr[i], m.indptr[i + 1]
            return float(m.data[lo:hi].dot(x[m.indices[lo:hi]]))
        return float(self.matrix[i].dot(x))

    def apply(self, i, x):
        return np.array([self._dot_row(i, x)])

    def linearize(self, i, x, h):
        return self.apply(i, h)

    def adjoint(self, i, x, w):
        return self._row(i) * float(np.asarray(w).reshape(-1)[0])

    def residual(self, i, x):
        return np.array([self._dot_row(i, x) - self.data[i]])

    def residuals(self, idx, x):
        idx = np.asarray(idx, dtype=np.intp)
        vals = self.matrix[idx].dot(x) - self.data[idx]
        return [vals[k:k + 1] for k in range(len(idx))]

    def adjoint_sum(self, idx, x, ws):
        idx = np.asarray(idx, dtype=np.intp)
        w = np.array([float(np.asarray(v).reshape(-1)[0]) for v in ws])
        sub = self.matrix[idx]
        if self.sparse:
            return np.asarray(sub.T.dot(w)).ravel()
        return w @ sub

    def apply_all(self, x):
        return list(self.matrix.dot(x).reshape(-1, 1))

    def apply_vector(self, x) -> np.ndarray:
        """All block values as one vector ``A @ x``."""
        return np.asarray(self.matrix.dot(x)).ravel()

    def residual_norms(self, x):
        return np.abs(self.apply_vector(x) - self.data)


@dataclass(frozen=True)
class GroundTruth:
    """Exact solution and the clean data it generates."""

    x_dagger: np.ndarray
    clean_data: object

    @classmethod
    def from_system(cls, system: ForwardSystem, x_dagger: np.ndarray) -> "GroundTruth":
        x_dagger = np.asarray(x_dagger, dtype=float).ravel()
        if isinstance(system, MatrixSystem):
            clean = system.apply_vector(x_dagger)
        else:
            clean = [system.apply(i, x_dagger) for i in range(system.n_blocks)]
        return cls(x_dagger, clean)
