"""Componentwise partial order, axis-aligned boxes and finite box unions.

Comparisons are exact floating-point: no epsilon is injected into the
order itself. Robustness margins belong to the certificate layer, not
to these primitives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError


def as_state(x, dim: int | None = None) -> np.ndarray:
    """Validate and return a finite 1-D float64 state vector."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise UsageError(f"state vector must be 1-D and nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"state vector has non-finite components: {arr}")
    if dim is not None and arr.size != dim:
        raise UsageError(f"expected dimension {dim}, got {arr.size}")
    return arr


def _check_same_dim(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise UsageError(f"dimension mismatch: {x.shape} vs {y.shape}")


def partial_leq(x, y) -> bool:
    """True iff x_j <= y_j for every component j (a partial, not total, order)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_same_dim(x, y)
    return bool(np.all(x <= y))


def shift(x, c: float) -> np.ndarray:
    """Return x + c * (1, ..., 1)."""
    return np.asarray(x, dtype=np.float64) + float(c)


@dataclass(frozen=True, eq=False)
class Box:
    """Closed axis-aligned box [lower, upper]."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_state(self.lower)
        hi = as_state(self.upper, dim=lo.size)
        if not np.all(lo <= hi):
            raise UsageError(f"box lower corner exceeds upper corner: {lo} vs {hi}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def extent(self) -> np.ndarray:
        return self.upper - self.lower

    def diameter_inf(self) -> float:
        """Infinity-norm diameter, sup over point pairs of ||x - y||_inf."""
        return float(np.max(self.extent))

    def contains(self, x) -> bool:
        x = as_state(x, dim=self.dim)
        return bool(np.all(self.lower <= x) and np.all(x <= self.upper))

    def contains_batch(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized membership for an array of points with shape (..., dim)."""
        pts = np.asarray(pts, dtype=np.float64)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=-1)

    def contains_box(self, other: "Box") -> bool:
        return bool(np.all(self.lower <= other.lower) and np.all(other.upper <= self.upper))

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Uniform sample(s); degenerate axes return their single value."""
        shape = (self.dim,) if size is None else (size, self.dim)
        u = rng.random(shape)
        return self.lower + u * self.extent

    def volume(self) -> float:
        return float(np.prod(self.extent))


@dataclass(frozen=True, eq=False)
class Region:
    """Finite union of boxes of equal dimension."""

    boxes: tuple[Box, ...]

    def __post_init__(self):
        boxes = tuple(self.boxes)
        if not boxes:
            raise UsageError("region needs at least one box")
        dim = boxes[0].dim
        for b in boxes[1:]:
            if b.dim != dim:
                raise UsageError("all region boxes must share one dimension")
        object.__setattr__(self, "boxes", boxes)

    @classmethod
    def of(cls, *boxes: Box) -> "Region":
        return cls(tuple(boxes))

    @property
    def dim(self) -> int:
        return self.boxes[0].dim

    def contains(self, x) -> bool:
        return any(b.contains(x) for b in self.boxes)

    def contains_batch(self, pts: np.ndarray) -> np.ndarray:
        out = self.boxes[0].contains_batch(pts)
        for b in self.boxes[1:]:
            out = out | b.contains_batch(pts)
        return out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Uniform over the union, boxes weighted by volume.

        Overlapping boxes are not deduplicated; sampling is volume-weighted
        over the list as given (adequate for the disjoint unions used here).
        """
        vols = np.array([b.volume() for b in self.boxes])
        if vols.sum() <= 0.0:
            # all boxes degenerate: pick uniformly among them
            vols = np.ones(len(self.boxes))
        probs = vols / vols.sum()
        choice = rng.choice(len(self.boxes), size=size, p=probs)
        out = np.empty((size, self.dim))
        for i, b in enumerate(self.boxes):
            mask = choice == i
            k = int(mask.sum())
            if k:
                out[mask] = b.sample(rng, size=k)
        return out


def box(lower, upper) -> Box:
    return Box(np.asarray(lower, dtype=np.float64), np.asarray(upper, dtype=np.float64))


def box_contains(b: Box, x) -> bool:
    """Closed-box membership test."""
    return b.contains(x)
