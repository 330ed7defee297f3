"""Constant-time weighted sampling via alias tables (Vose construction)."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


class AliasTable:
    """Alias table over a non-negative weight vector.

    Sampling draws index j uniformly, then returns j with probability
    prob[j] and alias[j] otherwise, so each draw costs O(1).
    """

    __slots__ = ("prob", "alias", "n")

    def __init__(self, weights) -> None:
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ParameterError("alias table needs a non-empty 1-d weight vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ParameterError("alias table weights must be finite and non-negative")
        total = w.sum()
        if total <= 0:
            raise ParameterError("alias table weights must not all be zero")
        n = w.size
        scaled = w * (n / total)
        prob = np.ones(n, dtype=np.float64)
        alias = np.arange(n, dtype=np.int64)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        # leftovers are 1.0 up to rounding
        for i in large:
            prob[i] = 1.0
        for i in small:
            prob[i] = 1.0
        self.prob = prob
        self.alias = alias
        self.n = n

    def sample(self, rng: np.random.Generator) -> int:
        j = int(rng.integers(0, self.n))
        if rng.random() < self.prob[j]:
            return j
        return int(self.alias[j])

    def sample_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.integers(0, self.n, size=size)
        u = rng.random(size)
        return np.where(u < self.prob[idx], idx, self.alias[idx]).astype(np.int64)

    def probabilities(self) -> np.ndarray:
        """Reconstruct the sampling distribution implied by the table."""
        p = self.prob / self.n
        np.add.at(p, self.alias, (1.0 - self.prob) / self.n)
        return p
