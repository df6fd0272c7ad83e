"""Half-open time intervals and fast overlap queries.

All intervals in the package are half-open [start, end) in seconds.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


def overlaps(a_start: float, a_end: float, b_start: float, b_end: float) -> bool:
    """True iff [a_start, a_end) and [b_start, b_end) intersect."""
    return a_start < b_end and b_start < a_end


class IntervalSet:
    """Immutable set of merged, sorted half-open intervals."""

    __slots__ = ("starts", "ends")

    def __init__(self, intervals: Iterable[tuple[float, float]] = ()):
        pairs = sorted((float(s), float(e)) for s, e in intervals if e > s)
        merged: list[list[float]] = []
        for s, e in pairs:
            if merged and s <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], e)
            else:
                merged.append([s, e])
        self.starts = np.array([m[0] for m in merged], dtype=float)
        self.ends = np.array([m[1] for m in merged], dtype=float)

    def __len__(self) -> int:
        return len(self.starts)

    def __iter__(self):
        return iter(zip(self.starts.tolist(), self.ends.tolist()))

    def intersects(self, start: float, end: float) -> bool:
        """True iff [start, end) overlaps any member interval."""
        if len(self.starts) == 0 or end <= start:
            return False
        # candidate: last interval starting before `end`
        i = int(np.searchsorted(self.starts, end, side="left")) - 1
        return i >= 0 and self.ends[i] > start

    def total_length(self) -> float:
        return float(np.sum(self.ends - self.starts))

    def complement(self, within: tuple[float, float]) -> "IntervalSet":
        """Gaps of this set inside [within[0], within[1])."""
        lo, hi = float(within[0]), float(within[1])
        out = []
        cur = lo
        for s, e in self:
            if e <= lo or s >= hi:
                continue
            if s > cur:
                out.append((cur, min(s, hi)))
            cur = max(cur, e)
        if cur < hi:
            out.append((cur, hi))
        return IntervalSet(out)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(list(self) + list(other))


def interval_set(intervals: Iterable[Sequence[float]]) -> IntervalSet:
    """Build an IntervalSet from any iterable of (start, end) pairs."""
    return IntervalSet((s, e) for s, e in intervals)
