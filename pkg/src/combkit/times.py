"""Time-label sets.

Time labels are plain strings ordered by their natural string order, so a
time set is just a sorted tuple of unique labels.  Labels like ``t1 .. t9``
sort as expected; zero-pad beyond nine steps.
"""

from typing import Iterable

from .errors import ValidationError


def as_times(labels: Iterable[str]) -> tuple[str, ...]:
    """Canonical time set: unique labels sorted by their natural string order."""
    ts = tuple(str(t) for t in labels)
    if len(set(ts)) != len(ts):
        raise ValidationError(f"duplicate time labels in {ts}")
    return tuple(sorted(ts))


def default_times(k: int) -> tuple[str, ...]:
    """Labels t1..tk, zero-padded once k exceeds one digit."""
    width = len(str(k))
    return tuple(f"t{j:0{width}d}" if k > 9 else f"t{j}" for j in range(1, k + 1))
