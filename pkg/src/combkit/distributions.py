"""Classical joint outcome distributions over finite time sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ShapeError, ValidationError
from .times import as_times


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint probabilities of one outcome per time.

    ``table`` axes follow the (ascending) time order; ``alphabets`` lists the
    outcome labels per time in the same order.
    """

    times: tuple[str, ...]
    alphabets: tuple[tuple[str, ...], ...]
    table: np.ndarray

    def __post_init__(self):
        times = tuple(str(t) for t in self.times)
        if list(times) != sorted(set(times)):
            raise ValidationError(f"time labels must be strictly increasing: {times}")
        object.__setattr__(self, "times", times)
        alphabets = tuple(tuple(str(a) for a in alpha) for alpha in self.alphabets)
        if len(alphabets) != len(times):
            raise ShapeError("need one alphabet per time")
        for alpha in alphabets:
            if not alpha or len(set(alpha)) != len(alpha):
                raise ValidationError(f"alphabet must be nonempty and unique: {alpha}")
        object.__setattr__(self, "alphabets", alphabets)
        table = np.asarray(self.table, dtype=float)
        expected = tuple(len(a) for a in alphabets)
        if table.shape != expected:
            raise ShapeError(f"table shape {table.shape} != alphabet sizes {expected}")
        if table.size and table.min() < -1e-12:
            raise ValidationError(f"negative probability {table.min():.3e}")
        if abs(table.sum() - 1.0) > 1e-10:
            raise ValidationError(f"probabilities sum to {table.sum()!r}, expected 1")
        table = np.ascontiguousarray(table)
        if table.flags.writeable:
            table = table.copy()
            table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def k(self) -> int:
        return len(self.times)

    def alphabet(self, time: str) -> tuple[str, ...]:
        try:
            return self.alphabets[self.times.index(time)]
        except ValueError:
            raise ShapeError(f"unknown time {time!r}; have {self.times}") from None

    def prob(self, outcomes: Sequence[str]) -> float:
        if len(outcomes) != self.k:
            raise ShapeError(f"expected {self.k} outcomes, got {len(outcomes)}")
        idx = []
        for out, alpha, t in zip(outcomes, self.alphabets, self.times):
            if out not in alpha:
                raise ShapeError(f"unknown outcome {out!r} at time {t!r}")
            idx.append(alpha.index(out))
        return float(self.table[tuple(idx)])

    def items(self) -> Iterator[tuple[tuple[str, ...], float]]:
        """All (outcome tuple, probability) pairs in lexicographic index order."""
        for flat_idx, p in enumerate(self.table.reshape(-1)):
            idx = np.unravel_index(flat_idx, self.table.shape)
            yield tuple(alpha[i] for alpha, i in zip(self.alphabets, idx)), float(p)


def marginalize(dist: JointDistribution, subset) -> JointDistribution:
    """Sum out the times that are not in ``subset``."""
    subset = as_times(subset)
    unknown = [t for t in subset if t not in dist.times]
    if unknown:
        raise ShapeError(f"subset times {unknown} not in distribution times {dist.times}")
    if subset == dist.times:
        return JointDistribution(dist.times, dist.alphabets, dist.table)
    summed_axes = tuple(i for i, t in enumerate(dist.times) if t not in subset)
    table = dist.table.sum(axis=summed_axes)
    kept = [i for i, t in enumerate(dist.times) if t in subset]
    return JointDistribution(subset, tuple(dist.alphabets[i] for i in kept), table)
