"""Index sampling and the active index set.

Draws are made from raw 64-bit words of a numpy bit generator with
rejection sampling, so an index below ``k`` is exactly uniform.
"""
from __future__ import annotations

import numpy as np

__all__ = ["IndexSampler", "ActiveSet", "solver_stream"]

_TWO64 = 1 << 64


def solver_stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for ``seed`` and an optional spawn key (trial, stream, ...)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


class IndexSampler:
    """Uniform integers from a generator's raw 64-bit output."""

    def __init__(self, rng: np.random.Generator | int):
        if not isinstance(rng, np.random.Generator):
            rng = solver_stream(int(rng))
        self._bits = rng.bit_generator
        self._buf: list[int] = []

    def _word(self) -> int:
        if not self._buf:
            self._buf = self._bits.random_raw(4096).tolist()
            self._buf.reverse()
        return self._buf.pop()

    def below(self, k: int) -> int:
        """Uniform integer in ``[0, k)``."""
        limit = _TWO64 - _TWO64 % k
        while True:
            w = self._word()
            if w < limit:
                return w % k

    def subset(self, pool, k: int) -> list[int]:
        """``k`` distinct elements of the sequence `pool`, in draw order.

        A partial Fisher-Yates shuffle on a virtual copy; ``pool`` is not
        modified and ``k = 1`` consumes exactly one draw like :meth:`below`.
        """
        n = len(pool)
        swaps: dict[int, int] = {}
        out = []
        for j in range(min(k, n)):
            p = j + self.below(n - j)
            out.append(swaps.get(p, pool[p]))
            swaps[p] = swaps.get(j, pool[j])
        return out


class ActiveSet:
    """The index set ``I_n`` with O(1) membership, removal and draw.

    Members occupy ``perm[:size]``; removal swaps with the last member and
    a reset restores the full set without reordering.
    """

    def __init__(self, n: int):
        self.n = n
        self.perm = list(range(n))
        self.pos = list(range(n))
        self.size = n

    def __len__(self) -> int:
        return self.size

    def __contains__(self, i: int) -> bool:
        return self.pos[i] < self.size

    def members(self) -> list[int]:
        return sorted(self.perm[:self.size])

    def remove(self, i: int) -> None:
        p = self.pos[i]
        if p >= self.size:
            return
        last = self.size - 1
        j = self.perm[last]
        self.perm[p], self.perm[last] = j, i
        self.pos[j], self.pos[i] = p, last
        self.size = last

    def reset(self) -> None:
        self.size = self.n

    def draw(self, sampler: IndexSampler) -> int:
        return self.perm[sampler.below(self.size)]

    def draw_batch(self, sampler: IndexSampler, b: int) -> list[int]:
        return sampler.subset(self.perm[:self.size], b)
