"""Weighted categorical sampling: alias tables and unigram noise tables."""

from typing import Sequence

import numpy as np

from ..validators import ValidationError


class AliasTable:
    """
    Vose alias table for O(1) draws from a fixed categorical distribution.

    Args:
        weights: Non-negative, not all zero
    """

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValidationError("Alias table needs a non-empty weight vector")
        if np.any(w < 0) or not np.isfinite(w).all() or w.sum() <= 0:
            raise ValidationError("Alias table weights must be finite, non-negative and not all zero")

        n = w.size
        scaled = w * n / w.sum()
        self.prob = np.zeros(n, dtype=np.float64)
        self.alias = np.zeros(n, dtype=np.int64)

        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s, l = small.pop(), large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = l
            scaled[l] = scaled[l] - (1.0 - scaled[s])
            if scaled[l] < 1.0:
                small.append(l)
            else:
                large.append(l)
        # leftovers are 1 up to rounding
        for i in large + small:
            self.prob[i] = 1.0
            self.alias[i] = i

    def __len__(self) -> int:
        return self.prob.size

    def probabilities(self) -> np.ndarray:
        """Exact categorical distribution encoded by the table."""
        n = self.prob.size
        p = self.prob / n
        np.add.at(p, self.alias, (1.0 - self.prob) / n)
        return p

    def draw(self, rng: np.random.Generator) -> int:
        i = int(rng.integers(self.prob.size))
        return i if rng.random() < self.prob[i] else int(self.alias[i])

    def draw_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.integers(self.prob.size, size=size)
        keep = rng.random(size) < self.prob[idx]
        return np.where(keep, idx, self.alias[idx])


class UnigramTable:
    """
    Noise distribution proportional to count ** power, drawn by binary search
    over the cumulative table.
    """

    def __init__(self, counts: Sequence[float], power: float = 0.75):
        c = np.asarray(counts, dtype=np.float64)
        if c.size == 0 or c.sum() <= 0:
            raise ValidationError("Unigram table needs positive counts")
        weights = np.power(c, power)
        self.cum_table = np.cumsum(weights / weights.sum())
        self.cum_table[-1] = 1.0

    def __len__(self) -> int:
        return self.cum_table.size

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.searchsorted(self.cum_table, rng.random(size), side="right")
