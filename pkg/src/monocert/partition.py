"""Hyper-rectangular tiling of a compact box and minimal region covers.

Tiling convention: cells are half-open along each axis except that the
last cell per axis is closed, so the cells are pairwise disjoint and
their union is exactly the domain. Corner queries return the *closed*
cell box (corners are shared between neighbours); only ownership of a
point follows the half-open rule.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .order import Box, Region, as_state

CellIndex = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class GridPartition:
    domain: Box
    counts: np.ndarray   # cells per axis
    widths: np.ndarray   # exact per-axis width: extent / counts

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        widths = np.asarray(self.widths, dtype=np.float64)
        if np.any(counts < 1):
            raise UsageError("every axis needs at least one cell")
        counts.setflags(write=False)
        widths.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "widths", widths)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.counts))

    def edge(self, axis: int, k: int) -> float:
        """k-th grid plane along an axis; the last edge is the domain face exactly."""
        if k == self.counts[axis]:
            return float(self.domain.upper[axis])
        return float(self.domain.lower[axis] + k * self.widths[axis])

    def cell_corners(self, idx: CellIndex) -> tuple[np.ndarray, np.ndarray]:
        idx = tuple(int(i) for i in idx)
        if len(idx) != self.dim:
            raise UsageError(f"index arity {len(idx)} != dimension {self.dim}")
        for ax, i in enumerate(idx):
            if not 0 <= i < self.counts[ax]:
                raise UsageError(f"cell index {idx} out of range on axis {ax}")
        lower = np.array([self.edge(ax, i) for ax, i in enumerate(idx)])
        upper = np.array([self.edge(ax, i + 1) for ax, i in enumerate(idx)])
        return lower, upper

    def cell_box(self, idx: CellIndex) -> Box:
        lo, hi = self.cell_corners(idx)
        return Box(lo, hi)

    def locate(self, x) -> CellIndex:
        """Owning cell of a point (half-open rule; last cell closed)."""
        x = as_state(x, dim=self.dim)
        if not self.domain.contains(x):
            raise UsageError(f"point {x} outside the domain")
        raw = np.floor((x - self.domain.lower) / self.widths).astype(np.int64)
        return tuple(int(v) for v in np.clip(raw, 0, self.counts - 1))

    def locate_batch(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized locate; returns (Q, dim) integer multi-indices."""
        pts = np.asarray(pts, dtype=np.float64)
        raw = np.floor((pts - self.domain.lower) / self.widths).astype(np.int64)
        return np.clip(raw, 0, self.counts - 1)

    def iter_cells(self):
        """Stream every multi-index without materializing the grid."""
        return itertools.product(*(range(int(c)) for c in self.counts))


def build_partition(domain: Box, target_width: float) -> GridPartition:
    """Per-axis count = ceil(extent / target_width); actual width <= target.

    A degenerate axis (zero extent) gets a single cell.
    """
    if target_width <= 0:
        raise UsageError("target width must be positive")
    extent = domain.extent
    counts = np.maximum(np.ceil(extent / target_width).astype(np.int64), 1)
    widths = np.where(extent > 0, extent / counts, 1.0)
    return GridPartition(domain=domain, counts=counts, widths=widths)


def _axis_cover(p: GridPartition, axis: int, a: float, b: float) -> range:
    """Cells whose half-open slab meets [a, b] with positive measure.

    A degenerate interval (a == b) resolves to the owning cell, so a region
    face sitting exactly on a grid plane is attributed to the cell that owns
    the plane under the half-open rule.
    """
    n = int(p.counts[axis])
    if a == b:
        raw = int(np.floor((a - p.domain.lower[axis]) / p.widths[axis]))
        k = min(max(raw, 0), n - 1)
        # float guard: nudge until the closed cell really contains the point
        while k > 0 and p.edge(axis, k) > a:
            k -= 1
        while k < n - 1 and p.edge(axis, k + 1) < a:
            k += 1
        return range(k, k + 1)
    # first cell k with edge(k+1) > a, last cell k with edge(k) < b
    lo = int(np.floor((a - p.domain.lower[axis]) / p.widths[axis]))
    lo = min(max(lo, 0), n - 1)
    while lo > 0 and p.edge(axis, lo) > a:
        lo -= 1
    while lo < n - 1 and p.edge(axis, lo + 1) <= a:
        lo += 1
    hi = int(np.ceil((b - p.domain.lower[axis]) / p.widths[axis])) - 1
    hi = min(max(hi, 0), n - 1)
    while hi < n - 1 and p.edge(axis, hi + 1) < b:
        hi += 1
    while hi > 0 and p.edge(axis, hi) >= b:
        hi -= 1
    return range(lo, hi + 1)


def cover_indices(p: GridPartition, region: Region) -> set[CellIndex]:
    """Minimal set of cells covering the region (a finite union of boxes).

    Exactly the cells meeting the region with positive overlap on every
    axis; minimality holds because each kept cell contains region points
    owned by no other cell.
    """
    for b in region.boxes:
        if not p.domain.contains_box(b):
            raise UsageError("region escapes the partition domain")
    out: set[CellIndex] = set()
    for b in region.boxes:
        ranges = [_axis_cover(p, ax, float(b.lower[ax]), float(b.upper[ax]))
                  for ax in range(p.dim)]
        out.update(itertools.product(*ranges))
    return out


@dataclass(frozen=True)
class CoverSets:
    """Minimal covers of the initial and unsafe regions."""

    initial: frozenset[CellIndex]
    unsafe: frozenset[CellIndex]


def cover_sets(p: GridPartition, initial: Region, unsafe: Region) -> CoverSets:
    return CoverSets(initial=frozenset(cover_indices(p, initial)),
                     unsafe=frozenset(cover_indices(p, unsafe)))
