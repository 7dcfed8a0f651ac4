"""Run metrics: task-points, cellsteps, heatmap snapshots and similarity histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .grid import Cell


@dataclass
class TaskPointTracker:
    """Counts rounds in which every room has been visited.

    After a round completes, the next event seeds the new round with the
    rooms that currently hold a robot.
    """

    n_rooms: int
    visited: set[int] = field(default_factory=set)
    count: int = 0
    event_steps: list[int] = field(default_factory=list)
    reseed: bool = False

    def update(self, visits: Iterable[int], occupied: Iterable[int] = (),
               event: int | None = None) -> "TaskPointTracker":
        if self.reseed:
            self.visited.update(occupied)
            self.reseed = False
        self.visited.update(visits)
        if len(self.visited) == self.n_rooms:
            self.count += 1
            self.event_steps.append(len(self.event_steps) if event is None else event)
            self.visited.clear()
            self.reseed = True
        return self


def taskpoint_update(tracker: TaskPointTracker, visits: Iterable[int],
                     occupied: Iterable[int] = (), event: int | None = None) -> TaskPointTracker:
    return tracker.update(visits, occupied, event)


def new_cellsteps(shape: tuple[int, int]) -> np.ndarray:
    return np.zeros(shape, dtype=np.int64)


def cellsteps_record(grid: np.ndarray, path: Sequence[Cell], free: np.ndarray) -> np.ndarray:
    for cell in path:
        if not free[cell]:
            raise ValueError(f"path crosses wall cell {cell}")
        grid[cell] += 1
    return grid


def snapshot_heatmap(values: np.ndarray, step: int) -> tuple[int, np.ndarray]:
    return step, np.array(values, dtype=np.float64, copy=True)


@dataclass
class DiffHistogram:
    bins: list[tuple[float, float]]
    counts: np.ndarray
    relative: np.ndarray
    cumulative: np.ndarray

    def share_within(self, lo: float, hi: float) -> float:
        """Relative frequency of the bins lying inside ``[lo, hi)``."""
        return float(sum(rel for (b_lo, b_hi), rel in zip(self.bins, self.relative)
                         if b_lo >= lo and b_hi <= hi))


def unit_bins(max_value: float) -> list[tuple[float, float]]:
    """Half-open bins [k, k+1) covering 0..max_value."""
    top = int(math.floor(max_value)) + 1
    return [(float(k), float(k + 1)) for k in range(top)]


def diff_histogram(a: np.ndarray, b: np.ndarray, free: np.ndarray,
                   bins: list[tuple[float, float]] | None = None) -> DiffHistogram:
    """Relative and cumulative frequencies of per-cell ``|a - b|`` over free cells.

    Bins are half-open ``[lo, hi)``; ``hi`` may be ``math.inf``.
    """
    if a.shape != b.shape or a.shape != free.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape} vs {free.shape}")
    diffs = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))[free]
    if bins is None:
        bins = unit_bins(diffs.max() if diffs.size else 0.0)
    counts = np.zeros(len(bins), dtype=np.int64)
    for i, (lo, hi) in enumerate(bins):
        counts[i] = np.count_nonzero((diffs >= lo) & (diffs < hi))
    if counts.sum() != diffs.size:
        raise ValueError("bins do not cover every difference exactly once")
    total = max(diffs.size, 1)
    relative = counts / total
    return DiffHistogram(list(bins), counts, relative, np.cumsum(counts) / total)
