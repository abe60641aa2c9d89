"""k-means clustering and a metric-generic minimum spanning tree.

Both consumers take their distance behavior from the outside: k-means is
squared-Euclidean by definition, while boruvka_mst runs under any object
with an ``evaluate(a, b)`` method, so swapping the metric never touches
this file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import DataMatrix

__all__ = ["KMeansResult", "kmeans", "MstResult", "boruvka_mst"]


@dataclass
class KMeansResult:
    centroids: DataMatrix
    assignments: np.ndarray
    objective: float
    iterations: int
    objective_history: list = field(default_factory=list)


def _squared_distances(values, centroids):
    """(num_points, k) squared Euclidean distances, computed directly.

    The naive expansion keeps every entry exactly non-negative, which the
    monotonicity guarantee leans on; the datasets this runs on are small
    enough that the extra memory does not matter.
    """
    diff = values[:, :, None] - centroids[:, None, :]
    return np.sum(diff * diff, axis=0)


def _objective(values, centroids, assignments):
    diff = values - centroids[:, assignments]
    return float(np.sum(diff * diff))


def kmeans(data: DataMatrix, k: int, max_iterations: int = 1000, seed: int = 42) -> KMeansResult:
    """Lloyd's algorithm with seeded Forgy initialization.

    Initial centroids are k distinct points drawn by the seeded
    generator.  Each iteration assigns every point to its nearest
    centroid (ties to the lowest centroid index) and then moves each
    centroid to the mean of its members; the loop stops when an
    assignment pass changes nothing or after max_iterations.

    A cluster left empty by an assignment pass seizes the point farthest
    from its current centroid (the centroid jumps onto that point), so
    every recorded objective value still decreases.  Points that are the
    sole member of their cluster are never seized, which keeps the repair
    from emptying one cluster to fill another.
    """
    n = data.num_points
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if max_iterations < 1:
        raise ValueError(f"max_iterations must be at least 1, got {max_iterations}")
    values = data.values
    rng = np.random.default_rng(seed)
    centroids = values[:, rng.choice(n, size=k, replace=False)].copy()

    assignments = None
    history: list = []
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        dists = _squared_distances(values, centroids)
        new_assign = np.argmin(dists, axis=1)
        counts = np.bincount(new_assign, minlength=k)
        if (counts == 0).any():
            own = dists[np.arange(n), new_assign]
            for c in np.nonzero(counts == 0)[0]:
                donors = counts[new_assign] >= 2
                j = int(np.flatnonzero(donors)[np.argmax(own[donors])])
                counts[new_assign[j]] -= 1
                new_assign[j] = c
                counts[c] = 1
                centroids[:, c] = values[:, j]
                own[j] = 0.0
        history.append(_objective(values, centroids, new_assign))
        if assignments is not None and np.array_equal(new_assign, assignments):
            break
        assignments = new_assign
        if iterations == max_iterations:
            break  # out of budget: keep the centroids the assignments refer to
        for c in range(k):
            centroids[:, c] = values[:, assignments == c].mean(axis=1)

    return KMeansResult(
        centroids=DataMatrix(centroids),
        assignments=assignments,
        objective=history[-1],
        iterations=iterations,
        objective_history=history,
    )


@dataclass
class MstResult:
    edges: list  # (index_a, index_b, weight) with index_a < index_b
    total_weight: float


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def boruvka_mst(data: DataMatrix, metric) -> MstResult:
    """Minimum spanning tree of the complete graph on the data points.

    Classic Boruvka rounds: every component picks its lightest outgoing
    edge (ties broken by the smaller (min index, max index) pair, so
    duplicate distances still give one deterministic tree) and all picks
    are merged at once.  Edge weights are metric.evaluate(point_i,
    point_j); the metric is any object with that method.

    The returned edges are sorted by index pair and total_weight is their
    exactly-rounded sum, so two trees with the same edge weights report
    identical totals regardless of discovery order.
    """
    n = data.num_points
    if n < 1:
        raise ValueError("minimum spanning tree needs at least one point")
    if n == 1:
        return MstResult(edges=[], total_weight=0.0)
    values = data.values

    pairwise = getattr(metric, "pairwise", None)
    if pairwise is not None:
        weights = pairwise(values)
    else:
        weights = np.empty((n, n))
        for i in range(n):
            weights[i, i] = 0.0
            for j in range(i + 1, n):
                weights[i, j] = weights[j, i] = metric.evaluate(values[:, i], values[:, j])

    uf = _UnionFind(n)
    edges = []
    components = n
    while components > 1:
        best = {}  # root -> (weight, min_index, max_index)
        roots = np.array([uf.find(i) for i in range(n)])
        for i in range(n):
            for j in range(i + 1, n):
                if roots[i] == roots[j]:
                    continue
                cand = (weights[i, j], i, j)
                for root in (roots[i], roots[j]):
                    if root not in best or cand < best[root]:
                        best[root] = cand
        for root in sorted(best):
            w, i, j = best[root]
            if uf.union(i, j):
                edges.append((i, j, float(w)))
                components -= 1

    edges.sort(key=lambda e: (e[0], e[1]))
    return MstResult(edges=edges, total_weight=math.fsum(e[2] for e in edges))
