"""Pluggable distance metrics and kernel functions.

Consumers (k-NN search, MST, kernelized methods) are written against two
small duck-typed contracts:

* metric: ``evaluate(a, b) -> float`` satisfying the metric axioms.
  Metrics may additionally provide ``min_distance_to_box(point, lo, hi)``
  (used for search-tree pruning) and ``pairwise(values)``; consumers fall
  back to plain ``evaluate`` when those are absent.
* kernel: ``evaluate(a, b) -> float``, symmetric in its arguments.

Any object with a compatible ``evaluate`` can be substituted.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "LpMetric",
    "EUCLIDEAN",
    "MANHATTAN",
    "CHEBYSHEV",
    "metric_from_name",
    "GaussianKernel",
    "LinearKernel",
    "PolynomialKernel",
]


def _as_points(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"points must be 1-D of equal dimension, got {a.shape} vs {b.shape}")
    return a, b


class LpMetric:
    """Minkowski distance with exponent p >= 1; p = inf means Chebyshev."""

    __slots__ = ("p",)

    def __init__(self, p):
        p = float(p)
        if math.isnan(p) or p < 1.0:
            raise ValueError(f"Lp metric requires p >= 1, got {p}")
        self.p = p

    def evaluate(self, a, b) -> float:
        a, b = _as_points(a, b)
        d = a - b
        if self.p == 1.0:
            return float(np.sum(np.abs(d)))
        if self.p == 2.0:
            return float(np.sqrt(np.sum(d * d)))
        if math.isinf(self.p):
            return float(np.max(np.abs(d))) if d.size else 0.0
        # np.power, not the scalar ** operator: the ufunc and Python scalar
        # pow round differently in the last ulp, and pairwise() uses the ufunc
        return float(np.power(np.sum(np.abs(d) ** self.p), 1.0 / self.p))

    def min_distance_to_box(self, point, bound_min, bound_max) -> float:
        """Distance from point to the nearest point of an axis-aligned box."""
        point = np.asarray(point, dtype=np.float64)
        clamped = np.minimum(np.maximum(point, bound_min), bound_max)
        return self.evaluate(point, clamped)

    def pairwise(self, values) -> np.ndarray:
        """All-pairs distances for a dims x points matrix.

        Column-by-column evaluation keeps the arithmetic identical to
        ``evaluate``, so entries match per-pair calls exactly.
        """
        values = np.asarray(values, dtype=np.float64)
        n = values.shape[1]
        out = np.empty((n, n), dtype=np.float64)
        for j in range(n):
            d = values - values[:, j : j + 1]
            if self.p == 1.0:
                out[:, j] = np.sum(np.abs(d), axis=0)
            elif self.p == 2.0:
                out[:, j] = np.sqrt(np.sum(d * d, axis=0))
            elif math.isinf(self.p):
                out[:, j] = np.max(np.abs(d), axis=0)
            else:
                out[:, j] = np.sum(np.abs(d) ** self.p, axis=0) ** (1.0 / self.p)
        return out

    def __repr__(self):
        return f"LpMetric(p={self.p})"


EUCLIDEAN = LpMetric(2)
MANHATTAN = LpMetric(1)
CHEBYSHEV = LpMetric(math.inf)

_NAMED_METRICS = {
    "euclidean": EUCLIDEAN,
    "manhattan": MANHATTAN,
    "chebyshev": CHEBYSHEV,
}


def metric_from_name(name: str) -> LpMetric:
    """Resolve a CLI selector: "euclidean", "manhattan", "chebyshev", "lp:<p>"."""
    key = name.strip().lower()
    if key in _NAMED_METRICS:
        return _NAMED_METRICS[key]
    if key.startswith("lp:"):
        try:
            return LpMetric(float(key[3:]))
        except ValueError as exc:
            raise ValueError(f"invalid metric selector {name!r}: {exc}") from None
    valid = ", ".join(sorted(_NAMED_METRICS) + ["lp:<p>"])
    raise ValueError(f"unknown metric {name!r}; valid selectors: {valid}")


class GaussianKernel:
    """k(a, b) = exp(-||a - b||^2 / (2 sigma^2)) with bandwidth sigma > 0."""

    __slots__ = ("bandwidth",)

    def __init__(self, bandwidth):
        bandwidth = float(bandwidth)
        if not bandwidth > 0.0:
            raise ValueError(f"bandwidth must be positive, got {bandwidth}")
        self.bandwidth = bandwidth

    def evaluate(self, a, b) -> float:
        a, b = _as_points(a, b)
        d = a - b
        return float(np.exp(-np.sum(d * d) / (2.0 * self.bandwidth**2)))


class LinearKernel:
    """k(a, b) = a . b"""

    __slots__ = ()

    def evaluate(self, a, b) -> float:
        a, b = _as_points(a, b)
        return float(np.dot(a, b))


class PolynomialKernel:
    """k(a, b) = (a . b + offset)^degree with integer degree >= 1, offset >= 0."""

    __slots__ = ("degree", "offset")

    def __init__(self, degree, offset=0.0):
        degree = int(degree)
        if degree < 1:
            raise ValueError(f"degree must be at least 1, got {degree}")
        offset = float(offset)
        if offset < 0.0:
            raise ValueError(f"offset must be non-negative, got {offset}")
        self.degree = degree
        self.offset = offset

    def evaluate(self, a, b) -> float:
        a, b = _as_points(a, b)
        return float((np.dot(a, b) + self.offset) ** self.degree)
