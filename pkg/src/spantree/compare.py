"""Two-tree comparison statistics: connection lengths and connection ratios.

For every vertex of a subject tree, the connection length is the distance
to the nearest vertex of a reference tree. The comparison is directional:
measuring a dense tree against a sparse one is not the same as the
converse. The connection ratio divides each connection length by the mean
length of the k edges nearest to that vertex, turning raw separation into
a local-density-aware anomaly score.

Edge-to-vertex proximity uses the edge midpoint, which is a cheap and
deterministic stand-in for a local density probe. The k-edge pool defaults
to the reference tree (separation judged against the reference's local
density) and can be switched to the subject tree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .errors import DegenerateStatistic, DimensionMismatch
from .mst import Tree

# exhaustive search is the reference behaviour; a spatial index is used
# only above this size and must agree with it exactly
_EXHAUSTIVE_LIMIT = 10_000
_CHUNK_ROWS = 512

EDGE_POOLS = ("reference", "subject")


@dataclass(frozen=True)
class ComparisonResult:
    """Per-vertex comparison of a subject tree against a reference tree."""

    vertex_indices: np.ndarray
    connection_length: np.ndarray
    weights: np.ndarray
    direction: str = "subject->reference"
    connection_ratio: np.ndarray | None = None
    k: int | None = None
    edge_pool: str | None = None
    infinite_ratio_count: int = 0

    def __post_init__(self) -> None:
        for name in ("vertex_indices", "connection_length", "weights"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.connection_ratio is not None:
            r = np.asarray(self.connection_ratio)
            r.setflags(write=False)
            object.__setattr__(self, "connection_ratio", r)

    def length_pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.connection_length.tolist(), self.weights.tolist()))

    def ratio_pairs(self) -> list[tuple[float, float]]:
        if self.connection_ratio is None:
            raise ValueError("this result carries no connection ratios")
        return list(zip(self.connection_ratio.tolist(), self.weights.tolist()))


def _check_dimensions(subject: Tree, reference: Tree) -> None:
    if subject.source.dimension != reference.source.dimension:
        raise DimensionMismatch(
            "trees live in different feature spaces: "
            f"{subject.source.dimension} vs {reference.source.dimension}"
        )


def _nearest_point_distances(queries: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Distance from each query point to its nearest target point."""
    if targets.shape[0] > _EXHAUSTIVE_LIMIT:
        dist, _ = cKDTree(targets).query(queries, k=1)
        return np.atleast_1d(dist)
    out = np.empty(queries.shape[0])
    for start in range(0, queries.shape[0], _CHUNK_ROWS):
        block = queries[start : start + _CHUNK_ROWS]
        out[start : start + block.shape[0]] = cdist(block, targets).min(axis=1)
    return out


def _nearest_edge_mean_lengths(
    queries: np.ndarray, midpoints: np.ndarray, lengths: np.ndarray, k: int
) -> np.ndarray:
    """Mean length of the k edges whose midpoints lie nearest each query."""
    n_edges = midpoints.shape[0]
    k_eff = min(k, n_edges)
    if n_edges > _EXHAUSTIVE_LIMIT:
        _, idx = cKDTree(midpoints).query(queries, k=k_eff)
        idx = np.atleast_2d(idx.reshape(queries.shape[0], k_eff))
        return lengths[idx].mean(axis=1)
    out = np.empty(queries.shape[0])
    for start in range(0, queries.shape[0], _CHUNK_ROWS):
        block = queries[start : start + _CHUNK_ROWS]
        d = cdist(block, midpoints)
        # stable sort keeps the lowest edge index on distance ties
        nearest = np.argsort(d, axis=1, kind="stable")[:, :k_eff]
        out[start : start + block.shape[0]] = lengths[nearest].mean(axis=1)
    return out


def connection_lengths(subject: Tree, reference: Tree) -> ComparisonResult:
    """Nearest-reference-vertex distance for each subject vertex.

    Directional: swapping subject and reference generally changes the
    distribution. Identical trees give zero everywhere.
    """
    _check_dimensions(subject, reference)
    sub = subject.source
    c = _nearest_point_distances(sub.coords, reference.source.coords)
    return ComparisonResult(
        vertex_indices=np.arange(len(sub), dtype=np.int64),
        connection_length=c,
        weights=sub.weights.copy(),
    )


def connection_ratios(
    subject: Tree,
    reference: Tree,
    k: int = 5,
    edge_pool: str = "reference",
) -> ComparisonResult:
    """Connection length over local mean edge length, per subject vertex.

    For each subject vertex the connection length is divided by the mean
    length of the k pool edges nearest the vertex (all of them if the pool
    has fewer than k). A zero local mean (coincident points) yields an
    infinite ratio, counted in ``infinite_ratio_count``.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if edge_pool not in EDGE_POOLS:
        raise ValueError(f"edge_pool must be one of {EDGE_POOLS}, got {edge_pool!r}")
    _check_dimensions(subject, reference)

    pool = reference if edge_pool == "reference" else subject
    if pool.edge_count == 0:
        raise DegenerateStatistic(f"{edge_pool} tree has no edges to pool")

    sub = subject.source
    c = _nearest_point_distances(sub.coords, reference.source.coords)

    coords = pool.source.coords
    midpoints = 0.5 * (coords[pool.edge_u] + coords[pool.edge_v])
    local_mean = _nearest_edge_mean_lengths(sub.coords, midpoints, pool.lengths, k)

    zero_mean = local_mean == 0
    ratio = np.full(c.shape, np.inf)
    np.divide(c, local_mean, out=ratio, where=~zero_mean)
    infinite = int(np.isinf(ratio).sum())

    return ComparisonResult(
        vertex_indices=np.arange(len(sub), dtype=np.int64),
        connection_length=c,
        weights=sub.weights.copy(),
        connection_ratio=ratio,
        k=k,
        edge_pool=edge_pool,
        infinite_ratio_count=infinite,
    )
