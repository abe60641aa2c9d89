"""kd-tree construction and exact nearest-neighbor / range search.

Search is generic over the metric contract: any object with
``evaluate(a, b)`` works.  Metrics that also provide
``min_distance_to_box`` (the Lp family does) enable bounding-box
pruning; other metrics are searched without pruning, which is slower
but still exact.

Results are deterministic: equal distances are broken by the smaller
point index, making the tree search bit-comparable to the brute-force
oracle.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .data import DataMatrix

__all__ = [
    "KdNode",
    "KdTree",
    "NeighborResult",
    "build_kdtree",
    "knn_search",
    "range_search",
    "brute_force_knn",
]


class KdNode:
    """One kd-tree node; a leaf iff ``point_indices`` is not None."""

    __slots__ = (
        "split_dim",
        "split_value",
        "left",
        "right",
        "bound_min",
        "bound_max",
        "point_indices",
    )

    def __init__(self):
        self.split_dim = None
        self.split_value = None
        self.left = None
        self.right = None
        self.bound_min = None
        self.bound_max = None
        self.point_indices = None

    @property
    def is_leaf(self) -> bool:
        return self.point_indices is not None


@dataclass
class KdTree:
    root: KdNode
    dataset: DataMatrix
    leaf_size: int


@dataclass
class NeighborResult:
    """k neighbors per query; distances ascending, ties by smaller index."""

    indices: np.ndarray  # (num_queries, k) point indices
    distances: np.ndarray  # (num_queries, k) ascending per row


def build_kdtree(data: DataMatrix, leaf_size: int = 20) -> KdTree:
    """Build a kd-tree over the columns of ``data``.

    Internal nodes split the widest-spread dimension at the left-biased
    median value; points with value < split go left.  When the median
    coincides with the dimension's minimum (heavy duplicates), the split
    value moves up to the next distinct value so both children stay
    non-empty.  A node whose points are all identical becomes a leaf even
    if it exceeds ``leaf_size``, since no split can separate it.
    """
    if data.num_points < 1:
        raise ValueError("cannot build a kd-tree over an empty dataset")
    if leaf_size < 1:
        raise ValueError(f"leaf_size must be at least 1, got {leaf_size}")
    values = data.values
    root = KdNode()
    stack = [(root, np.arange(data.num_points))]
    while stack:
        node, idx = stack.pop()
        pts = values[:, idx]
        node.bound_min = pts.min(axis=1)
        node.bound_max = pts.max(axis=1)
        if idx.size <= leaf_size:
            node.point_indices = idx
            continue
        spreads = node.bound_max - node.bound_min
        split_dim = int(np.argmax(spreads))
        if spreads[split_dim] == 0.0:
            node.point_indices = idx  # all points identical; unsplittable
            continue
        col = pts[split_dim]
        sorted_vals = np.sort(col)
        split_value = sorted_vals[(idx.size - 1) // 2]
        if split_value == sorted_vals[0]:
            split_value = sorted_vals[sorted_vals > split_value][0]
        node.split_dim = split_dim
        node.split_value = float(split_value)
        mask = col < split_value
        node.left, node.right = KdNode(), KdNode()
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return KdTree(root=root, dataset=data, leaf_size=leaf_size)


def _check_query_dims(tree_or_data_dims: int, queries: DataMatrix):
    if queries.num_dims != tree_or_data_dims:
        raise ValueError(
            f"query dimension {queries.num_dims} != dataset dimension {tree_or_data_dims}"
        )


def _check_k(k: int, num_points: int):
    if not 1 <= k <= num_points:
        raise ValueError(f"k must lie in [1, {num_points}], got {k}")


def knn_search(tree: KdTree, queries: DataMatrix, k: int, metric) -> NeighborResult:
    """Exact k nearest neighbors of every query under ``metric``.

    Matches brute_force_knn exactly on indices: the k smallest distances,
    ties broken by smaller point index.
    """
    data = tree.dataset
    _check_query_dims(data.num_dims, queries)
    _check_k(k, data.num_points)
    box_bound = getattr(metric, "min_distance_to_box", None)
    values = data.values
    nq = queries.num_points
    out_idx = np.empty((nq, k), dtype=np.int64)
    out_dist = np.empty((nq, k), dtype=np.float64)
    for qi in range(nq):
        q = queries.point(qi)
        heap = []  # (-distance, -index): heap[0] is the current worst kept pair
        stack = [tree.root]
        while stack:
            node = stack.pop()
            if len(heap) == k and box_bound is not None:
                # Prune only on a strictly larger bound: a bound equal to
                # the current worst distance may hide a smaller-index tie.
                if box_bound(q, node.bound_min, node.bound_max) > -heap[0][0]:
                    continue
            if node.is_leaf:
                for i in node.point_indices:
                    d = metric.evaluate(q, values[:, i])
                    if len(heap) < k:
                        heapq.heappush(heap, (-d, -i))
                    elif (d, i) < (-heap[0][0], -heap[0][1]):
                        heapq.heapreplace(heap, (-d, -i))
            else:
                if q[node.split_dim] < node.split_value:
                    near, far = node.left, node.right
                else:
                    near, far = node.right, node.left
                stack.append(far)
                stack.append(near)
        pairs = sorted((-nd, -ni) for nd, ni in heap)
        out_dist[qi] = [d for d, _ in pairs]
        out_idx[qi] = [i for _, i in pairs]
    return NeighborResult(indices=out_idx, distances=out_dist)


def range_search(tree: KdTree, queries: DataMatrix, radius: float, metric):
    """All dataset points within ``radius`` of each query.

    Returns one (indices, distances) pair per query with indices
    ascending; distance exactly equal to the radius counts as inside.
    """
    if not radius > 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    data = tree.dataset
    _check_query_dims(data.num_dims, queries)
    box_bound = getattr(metric, "min_distance_to_box", None)
    values = data.values
    results = []
    for qi in range(queries.num_points):
        q = queries.point(qi)
        found = []
        stack = [tree.root]
        while stack:
            node = stack.pop()
            if box_bound is not None and box_bound(q, node.bound_min, node.bound_max) > radius:
                continue
            if node.is_leaf:
                for i in node.point_indices:
                    d = metric.evaluate(q, values[:, i])
                    if d <= radius:
                        found.append((int(i), d))
            else:
                stack.append(node.right)
                stack.append(node.left)
        found.sort()
        results.append(
            (
                np.array([i for i, _ in found], dtype=np.int64),
                np.array([d for _, d in found], dtype=np.float64),
            )
        )
    return results


def brute_force_knn(data: DataMatrix, queries: DataMatrix, k: int, metric) -> NeighborResult:
    """Exhaustive-scan k-NN; the oracle knn_search must agree with."""
    _check_query_dims(data.num_dims, queries)
    _check_k(k, data.num_points)
    values = data.values
    n = data.num_points
    nq = queries.num_points
    out_idx = np.empty((nq, k), dtype=np.int64)
    out_dist = np.empty((nq, k), dtype=np.float64)
    point_ids = np.arange(n)
    for qi in range(nq):
        q = queries.point(qi)
        dists = np.array([metric.evaluate(q, values[:, i]) for i in range(n)])
        order = np.lexsort((point_ids, dists))[:k]
        out_idx[qi] = order
        out_dist[qi] = dists[order]
    return NeighborResult(indices=out_idx, distances=out_dist)
