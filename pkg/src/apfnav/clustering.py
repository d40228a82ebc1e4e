"""Euclidean clustering of point clouds and cluster centroids.

Clusters are the connected components of the graph that links points at
distance <= tolerance. Components below the minimum size are discarded and
the survivors are ordered by their smallest member index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree


@dataclass(frozen=True)
class Cluster:
    point_indices: np.ndarray
    centroid: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.point_indices, dtype=int)
        if idx.size == 0:
            raise ValueError("cluster must be non-empty")
        object.__setattr__(self, "point_indices", idx)
        object.__setattr__(self, "centroid", np.asarray(self.centroid, dtype=float))


def centroid(point_indices, points: np.ndarray) -> np.ndarray:
    """Componentwise arithmetic mean of the member points."""
    idx = np.asarray(point_indices, dtype=int)
    if idx.size == 0:
        raise ValueError("cannot compute the centroid of an empty cluster")
    return np.mean(np.asarray(points, dtype=float)[idx], axis=0)


def euclidean_cluster(points: np.ndarray, cluster_tolerance: float,
                      min_cluster_size: int = 1) -> list[Cluster]:
    """Partition a cloud into clusters of mutually reachable points.

    Neighbor pairs come from a KD-tree radius query (distance <= tolerance,
    exact); components from a sparse connected-components pass.
    """
    if cluster_tolerance <= 0:
        raise ValueError("cluster_tolerance must be positive")
    if min_cluster_size < 1:
        raise ValueError("min_cluster_size must be >= 1")
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return []
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must be an (N, 3) array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")

    n = pts.shape[0]
    pairs = cKDTree(pts).query_pairs(cluster_tolerance, output_type="ndarray")
    if pairs.size:
        row = np.concatenate([pairs[:, 0], pairs[:, 1]])
        col = np.concatenate([pairs[:, 1], pairs[:, 0]])
        graph = sparse.coo_matrix((np.ones(row.size, dtype=np.int8), (row, col)), shape=(n, n))
    else:
        graph = sparse.coo_matrix((n, n), dtype=np.int8)
    _, labels = sparse.csgraph.connected_components(graph, directed=False)

    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    boundaries = np.flatnonzero(np.diff(sorted_labels)) + 1
    groups = np.split(order, boundaries)

    clusters = [Cluster(np.sort(g), centroid(g, pts)) for g in groups if g.size >= min_cluster_size]
    clusters.sort(key=lambda c: int(c.point_indices[0]))
    return clusters
