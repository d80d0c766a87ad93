"""Points, point sets, Euclidean distance, and feature rescaling.

A :class:`PointSet` is the substrate for everything else in the package:
each point is an event in an n-dimensional feature space, carrying a
non-negative weight (default 1) and an optional process label. Coordinates
are double precision. Distances are plain Euclidean, so features with very
different units or ranges should be rescaled before building trees; both
standard rescalings are provided and the default is to leave data untouched.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch

RESCALE_MODES = ("none", "unit-range", "unit-variance")


@dataclass(frozen=True)
class Point:
    """A single event: coordinates, a non-negative weight, an optional label."""

    coords: tuple[float, ...]
    weight: float = 1.0
    label: str | None = None

    def __post_init__(self) -> None:
        if self.weight < 0:
            raise ValueError(f"point weight must be non-negative, got {self.weight}")

    @property
    def dimension(self) -> int:
        return len(self.coords)


class PointSet:
    """An immutable set of m points sharing one dimension.

    Coordinates are held as a read-only (m, n) float64 array. A 1-d input
    array is interpreted as m points in one dimension.
    """

    def __init__(
        self,
        coords,
        weights=None,
        labels: Sequence[str | None] | None = None,
        feature_names: Sequence[str] | None = None,
    ) -> None:
        arr = np.array(coords, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValueError(f"coords must be a 1-d or 2-d array, got ndim={arr.ndim}")
        m, n = arr.shape
        if m < 1:
            raise ValueError("a PointSet must contain at least one point")
        if n < 1:
            raise ValueError("points must have at least one coordinate")

        if weights is None:
            w = np.ones(m, dtype=np.float64)
        else:
            w = np.array(weights, dtype=np.float64, copy=True)
            if w.shape != (m,):
                raise ValueError(f"weights must have shape ({m},), got {w.shape}")
            if np.any(w < 0):
                raise ValueError("weights must be non-negative")

        if labels is not None:
            labels = tuple(labels)
            if len(labels) != m:
                raise ValueError(f"labels must have length {m}, got {len(labels)}")
        if feature_names is not None:
            feature_names = tuple(str(f) for f in feature_names)
            if len(feature_names) != n:
                raise ValueError(
                    f"feature_names must have length {n}, got {len(feature_names)}"
                )

        arr.setflags(write=False)
        w.setflags(write=False)
        self._coords = arr
        self._weights = w
        self._labels = labels
        self._feature_names = feature_names

    @classmethod
    def from_points(cls, points: Iterable[Point], feature_names=None) -> "PointSet":
        pts = list(points)
        if not pts:
            raise ValueError("a PointSet must contain at least one point")
        dim = pts[0].dimension
        for p in pts:
            if p.dimension != dim:
                raise DimensionMismatch(
                    f"all points must share one dimension ({dim} vs {p.dimension})"
                )
        coords = np.array([p.coords for p in pts], dtype=np.float64)
        weights = np.array([p.weight for p in pts], dtype=np.float64)
        labels = [p.label for p in pts]
        if all(l is None for l in labels):
            labels = None
        return cls(coords, weights, labels, feature_names)

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def labels(self) -> tuple[str | None, ...] | None:
        return self._labels

    @property
    def feature_names(self) -> tuple[str, ...] | None:
        return self._feature_names

    @property
    def dimension(self) -> int:
        return self._coords.shape[1]

    def __len__(self) -> int:
        return self._coords.shape[0]

    def point(self, i: int) -> Point:
        label = self._labels[i] if self._labels is not None else None
        return Point(tuple(self._coords[i]), float(self._weights[i]), label)

    @property
    def points(self) -> list[Point]:
        return [self.point(i) for i in range(len(self))]

    def feature_index(self, feature: int | str) -> int:
        """Resolve a feature given by position or by name to a column index."""
        if isinstance(feature, int):
            if not 0 <= feature < self.dimension:
                raise ValueError(f"feature index {feature} out of range")
            return feature
        if self._feature_names is None:
            raise ValueError(f"point set has no feature names, cannot resolve {feature!r}")
        try:
            return self._feature_names.index(feature)
        except ValueError:
            raise ValueError(
                f"unknown feature {feature!r}; available: {self._feature_names}"
            ) from None

    def with_weights(self, weights) -> "PointSet":
        """Same coordinates and labels, new per-point weights."""
        return PointSet(self._coords, weights, self._labels, self._feature_names)

    def with_coords(self, coords) -> "PointSet":
        """Same weights and labels, new coordinates (same point count)."""
        coords = np.asarray(coords, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)
        if coords.shape[0] != len(self):
            raise ValueError("point count must be preserved")
        return PointSet(coords, self._weights, self._labels, self._feature_names)

    def __repr__(self) -> str:
        return f"PointSet(m={len(self)}, dimension={self.dimension})"


def euclidean_distance(a: Point, b: Point) -> float:
    """Euclidean distance between two points of equal dimension."""
    if a.dimension != b.dimension:
        raise DimensionMismatch(
            f"points have different dimensions: {a.dimension} vs {b.dimension}"
        )
    acc = 0.0
    for x, y in zip(a.coords, b.coords):
        d = x - y
        acc += d * d
    return math.sqrt(acc)


@dataclass(frozen=True)
class AffineRescale:
    """Per-feature affine map ``x -> (x - offset) / scale`` used by a rescale.

    Kept alongside the rescaled data so downstream reports can state the
    original units. ``scale`` is strictly positive; degenerate constant
    features get scale 1 (and therefore map to 0 under unit-range).
    """

    mode: str
    offset: np.ndarray
    scale: np.ndarray

    def apply(self, coords: np.ndarray) -> np.ndarray:
        return (np.asarray(coords, dtype=np.float64) - self.offset) / self.scale

    def invert(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(coords, dtype=np.float64) * self.scale + self.offset


def rescale_features(ps: PointSet, mode: str = "none") -> tuple[PointSet, AffineRescale]:
    """Rescale every feature of a point set; weights and labels are unchanged.

    ``unit-range`` maps each feature to [0, 1] via (x - min) / (max - min);
    ``unit-variance`` maps to (x - mean) / stddev. Constant features map
    to 0 in either mode. Returns the rescaled set together with the affine
    parameters that were applied.
    """
    if mode not in RESCALE_MODES:
        raise ValueError(f"unknown rescale mode {mode!r}; expected one of {RESCALE_MODES}")
    n = ps.dimension
    if mode == "none":
        params = AffineRescale(mode, np.zeros(n), np.ones(n))
        return ps, params

    coords = ps.coords
    if mode == "unit-range":
        offset = coords.min(axis=0)
        scale = coords.max(axis=0) - offset
    else:
        if len(ps) < 2:
            raise ValueError("unit-variance rescaling requires at least two points")
        offset = coords.mean(axis=0)
        scale = coords.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    params = AffineRescale(mode, offset, scale)
    return ps.with_coords(params.apply(coords)), params
