"""Classifiers sharing one uniform contract.

Every classifier implements ``train(data, labels, num_classes)``,
``classify_point(point)`` and ``classify_batch(data)``; generic code such
as :func:`train_and_score` runs any of them without knowing which one it
holds.  classify_* may only be called after train and always returns
class indices in [0, num_classes).
"""

from __future__ import annotations

import numpy as np

from .data import DataMatrix, LabelRow, accuracy
from .errors import NotTrainedError
from .optimize import OptimizerConfig, optimizer_from_name

__all__ = [
    "DecisionTree",
    "NaiveBayes",
    "Perceptron",
    "LogisticRegression",
    "LogisticLoss",
    "train_and_score",
    "classifier_from_name",
]


def _check_training_inputs(data: DataMatrix, labels: LabelRow, num_classes: int):
    if data.num_points == 0:
        raise ValueError("cannot train on an empty dataset")
    if len(labels) != data.num_points:
        raise ValueError(
            f"labels length {len(labels)} != num_points {data.num_points}"
        )
    num_classes = int(num_classes)
    if num_classes < 1:
        raise ValueError("num_classes must be at least 1")
    if labels.labels.size and labels.labels.max() >= num_classes:
        raise ValueError(
            f"label {labels.labels.max()} out of range for {num_classes} classes"
        )
    return num_classes


class _ClassifierBase:
    """Shared plumbing: trained-state guard and the point/batch bridge."""

    _trained = False
    num_dims = None
    num_classes = None

    def _require_trained(self):
        if not self._trained:
            raise NotTrainedError(f"{type(self).__name__} has not been trained")

    def _check_batch(self, data: DataMatrix):
        self._require_trained()
        if data.num_dims != self.num_dims:
            raise ValueError(
                f"data has {data.num_dims} dimensions, model expects {self.num_dims}"
            )

    def classify_point(self, point) -> int:
        """Class index for a single point (column vector semantics)."""
        self._require_trained()
        point = np.asarray(point, dtype=np.float64)
        if point.ndim != 1 or point.size != self.num_dims:
            raise ValueError(
                f"point has shape {point.shape}, model expects dimension {self.num_dims}"
            )
        return int(self.classify_batch(DataMatrix(point.reshape(-1, 1))).labels[0])


class DecisionTree(_ClassifierBase):
    """Binary classification tree grown by exhaustive Gini-gain splits.

    Every node scans all features and every midpoint between consecutive
    distinct sorted values; only splits leaving both children at least
    ``min_leaf_size`` points are candidates, and ties between equal gains
    go to the lower feature index and then the lower threshold.  An
    impure node always takes the best legal candidate, even at zero gain
    (points like the XOR corners need two zero-gain cuts before any
    impurity drops), so growth stops only at purity, ``max_depth``, or
    when no candidate is legal.  Leaves hold the empirical class
    distribution of their training points.
    """

    def __init__(self, min_leaf_size: int = 10, max_depth: int | None = None):
        if min_leaf_size < 1:
            raise ValueError(f"min_leaf_size must be at least 1, got {min_leaf_size}")
        if max_depth is not None and max_depth < 0:
            raise ValueError(f"max_depth must be non-negative, got {max_depth}")
        self.min_leaf_size = int(min_leaf_size)
        self.max_depth = max_depth

    def train(self, data: DataMatrix, labels: LabelRow, num_classes: int):
        num_classes = _check_training_inputs(data, labels, num_classes)
        values = data.values
        y = labels.labels
        min_leaf = self.min_leaf_size

        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        probs: list[np.ndarray] = []

        def new_node() -> int:
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            probs.append(None)
            return len(feature) - 1

        depth_seen = 0
        stack = [(new_node(), np.arange(data.num_points), 0)]
        while stack:
            nid, idx, depth = stack.pop()
            depth_seen = max(depth_seen, depth)
            node_y = y[idx]
            counts = np.bincount(node_y, minlength=num_classes)
            m = idx.size
            split = None
            depth_ok = self.max_depth is None or depth < self.max_depth
            if depth_ok and m >= 2 * min_leaf and counts.max() < m:
                split = _best_gini_split(values[:, idx], node_y, counts, num_classes, min_leaf)
            if split is None:
                probs[nid] = counts / m
                continue
            f, t = split
            feature[nid] = f
            threshold[nid] = t
            mask = values[f, idx] < t
            left[nid] = new_node()
            right[nid] = new_node()
            stack.append((left[nid], idx[mask], depth + 1))
            stack.append((right[nid], idx[~mask], depth + 1))

        self.num_dims = data.num_dims
        self.num_classes = num_classes
        self.depth = depth_seen
        self._feature = np.array(feature, dtype=np.int64)
        self._threshold = np.array(threshold, dtype=np.float64)
        self._left = np.array(left, dtype=np.int64)
        self._right = np.array(right, dtype=np.int64)
        self._probs = np.zeros((len(feature), num_classes))
        for i, p in enumerate(probs):
            if p is not None:
                self._probs[i] = p
        self._leaf_pred = np.argmax(self._probs, axis=1)
        self._trained = True
        return self

    @property
    def num_nodes(self) -> int:
        self._require_trained()
        return self._feature.size

    def classify_batch(self, data: DataMatrix) -> LabelRow:
        self._check_batch(data)
        values = data.values
        out = np.empty(data.num_points, dtype=np.int64)
        stack = [(0, np.arange(data.num_points))]
        while stack:
            nid, idx = stack.pop()
            if idx.size == 0:
                continue
            f = self._feature[nid]
            if f < 0:
                out[idx] = self._leaf_pred[nid]
                continue
            mask = values[f, idx] < self._threshold[nid]
            stack.append((self._left[nid], idx[mask]))
            stack.append((self._right[nid], idx[~mask]))
        return LabelRow(out, self.num_classes)


def _best_gini_split(X, y, counts, num_classes, min_leaf):
    """Best (feature, threshold) by Gini gain, or None when no legal
    candidate improves on the parent.

    X is the node's dims x m submatrix, counts the per-class totals.
    """
    m = y.size
    parent_gini = 1.0 - float(np.sum((counts / m) ** 2))
    order = np.argsort(X, axis=1)
    class_range = np.arange(num_classes)
    best_gain = -np.inf
    best = None
    for f in range(X.shape[0]):
        sv = X[f, order[f]]
        boundaries = np.nonzero(sv[1:] != sv[:-1])[0]
        if boundaries.size == 0:
            continue
        left_n = boundaries + 1
        valid = (left_n >= min_leaf) & (m - left_n >= min_leaf)
        if not valid.any():
            continue
        b = boundaries[valid]
        ln = left_n[valid].astype(np.float64)
        rn = m - ln
        sy = y[order[f]]
        cum = np.cumsum(sy[:, None] == class_range, axis=0)
        left_counts = cum[b]
        right_counts = counts - left_counts
        gini_left = 1.0 - np.sum((left_counts / ln[:, None]) ** 2, axis=1)
        gini_right = 1.0 - np.sum((right_counts / rn[:, None]) ** 2, axis=1)
        gains = parent_gini - (ln / m) * gini_left - (rn / m) * gini_right
        pos = int(np.argmax(gains))
        if gains[pos] > best_gain:
            best_gain = float(gains[pos])
            lo = sv[b[pos]]
            hi = sv[b[pos] + 1]
            t = lo + (hi - lo) / 2.0
            if not lo < t:
                t = hi  # adjacent floats: keep the left block strictly below t
            best = (f, float(t))
    return best


class NaiveBayes(_ClassifierBase):
    """Gaussian naive Bayes with per-class diagonal variances.

    Priors are class frequencies; variances are population variances
    floored at 1e-10 so constant features never divide by zero.  Classes
    absent from the training data get prior 0 and are never predicted.
    """

    VARIANCE_FLOOR = 1e-10

    def train(self, data: DataMatrix, labels: LabelRow, num_classes: int):
        num_classes = _check_training_inputs(data, labels, num_classes)
        values = data.values
        y = labels.labels
        n = data.num_points
        d = data.num_dims
        priors = np.zeros(num_classes)
        means = np.zeros((num_classes, d))
        variances = np.full((num_classes, d), self.VARIANCE_FLOOR)
        for c in range(num_classes):
            members = values[:, y == c]
            if members.shape[1] == 0:
                continue
            priors[c] = members.shape[1] / n
            means[c] = members.mean(axis=1)
            variances[c] = np.maximum(members.var(axis=1), self.VARIANCE_FLOOR)
        self.priors = priors
        self.means = means
        self.variances = variances
        self.num_dims = d
        self.num_classes = num_classes
        self._finish_train()
        return self

    def _finish_train(self):
        with np.errstate(divide="ignore"):
            self._log_priors = np.where(
                self.priors > 0, np.log(np.maximum(self.priors, 1e-300)), -np.inf
            )
        self._log_norm = np.sum(np.log(2.0 * np.pi * self.variances), axis=1)
        self._trained = True

    def classify_batch(self, data: DataMatrix) -> LabelRow:
        self._check_batch(data)
        values = data.values
        scores = np.empty((self.num_classes, data.num_points))
        for c in range(self.num_classes):
            diff = values - self.means[c][:, None]
            mahal = np.sum(diff * diff / self.variances[c][:, None], axis=0)
            scores[c] = self._log_priors[c] - 0.5 * (mahal + self._log_norm[c])
        return LabelRow(np.argmax(scores, axis=0), self.num_classes)


class Perceptron(_ClassifierBase):
    """Multiclass perceptron with the bias absorbed into the weights.

    Mistake-driven updates (add the point to the true class row, subtract
    it from the predicted row) repeat until an error-free epoch or
    ``max_epochs``; ``converged`` records which happened.
    """

    def __init__(self, max_epochs: int = 1000):
        if max_epochs < 1:
            raise ValueError(f"max_epochs must be at least 1, got {max_epochs}")
        self.max_epochs = int(max_epochs)

    def train(self, data: DataMatrix, labels: LabelRow, num_classes: int):
        num_classes = _check_training_inputs(data, labels, num_classes)
        augmented = np.vstack([data.values, np.ones(data.num_points)])
        y = labels.labels
        weights = np.zeros((num_classes, data.num_dims + 1))
        converged = False
        epochs = 0
        for epochs in range(1, self.max_epochs + 1):
            mistakes = 0
            for j in range(data.num_points):
                x = augmented[:, j]
                predicted = int(np.argmax(weights @ x))
                if predicted != y[j]:
                    weights[y[j]] += x
                    weights[predicted] -= x
                    mistakes += 1
            if mistakes == 0:
                converged = True
                break
        self.weights = weights
        self.converged = converged
        self.epochs_used = epochs
        self.num_dims = data.num_dims
        self.num_classes = num_classes
        self._trained = True
        return self

    def classify_batch(self, data: DataMatrix) -> LabelRow:
        self._check_batch(data)
        augmented = np.vstack([data.values, np.ones(data.num_points)])
        return LabelRow(np.argmax(self.weights @ augmented, axis=0), self.num_classes)


def _sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


class LogisticLoss:
    """Mean binary cross-entropy plus an L2 penalty on the non-bias weights.

    J(w) = (1/n) sum_i [softplus(z_i) - y_i z_i] + (penalty/2) ||w[:-1]||^2
    with z_i = w . (x_i, 1).  Separable: term i carries ce_i / n plus its
    1/n share of the penalty, so the terms sum to the full objective.
    """

    def __init__(self, augmented, targets, penalty=0.0):
        self.augmented = augmented  # (d+1) x n, ones in the last row
        self.targets = np.asarray(targets, dtype=np.float64)
        self.penalty = float(penalty)
        self.dimension = augmented.shape[0]
        self.num_terms = augmented.shape[1]

    def _penalty_value(self, w):
        return 0.5 * self.penalty * float(np.dot(w[:-1], w[:-1]))

    def _penalty_grad(self, w):
        g = self.penalty * w
        g[-1] = 0.0
        return g

    def evaluate(self, w):
        z = w @ self.augmented
        ce = np.logaddexp(0.0, z) - self.targets * z
        return float(np.mean(ce)) + self._penalty_value(w)

    def gradient(self, w):
        z = w @ self.augmented
        residual = _sigmoid(z) - self.targets
        return self.augmented @ residual / self.num_terms + self._penalty_grad(w)

    def evaluate_term(self, w, i):
        z = float(w @ self.augmented[:, i])
        ce = np.logaddexp(0.0, z) - self.targets[i] * z
        return (ce + self._penalty_value(w)) / self.num_terms

    def gradient_term(self, w, i):
        x = self.augmented[:, i]
        z = float(w @ x)
        residual = _sigmoid(z) - self.targets[i]
        return (residual * x + self._penalty_grad(w)) / self.num_terms


class LogisticRegression(_ClassifierBase):
    """Binary logistic regression, reduced one-vs-rest for more classes.

    Training minimizes :class:`LogisticLoss` with whichever optimizer is
    supplied (a shipped name like "gd"/"sgd"/"adam", or any object with
    an ``optimize(objective, x0)`` method); the fitted model records the
    optimizer used in ``trained_with``.
    """

    def __init__(self, optimizer="adam", config: OptimizerConfig | None = None, penalty: float = 1e-4):
        if config is None:
            config = OptimizerConfig(step_size=0.1, max_iterations=500, tolerance=1e-10)
        if isinstance(optimizer, str):
            optimizer = optimizer_from_name(optimizer, config)
        self.optimizer = optimizer
        if penalty < 0:
            raise ValueError(f"penalty must be non-negative, got {penalty}")
        self.penalty = float(penalty)

    def _fit_binary(self, augmented, targets):
        loss = LogisticLoss(augmented, targets, self.penalty)
        result = self.optimizer.optimize(loss, np.zeros(loss.dimension))
        return result.final_point

    def train(self, data: DataMatrix, labels: LabelRow, num_classes: int):
        num_classes = _check_training_inputs(data, labels, num_classes)
        augmented = np.vstack([data.values, np.ones(data.num_points)])
        y = labels.labels
        if num_classes == 1:
            self.weights = np.zeros(data.num_dims + 1)
        elif num_classes == 2:
            self.weights = self._fit_binary(augmented, (y == 1).astype(np.float64))
        else:
            self.weights = np.vstack(
                [
                    self._fit_binary(augmented, (y == c).astype(np.float64))
                    for c in range(num_classes)
                ]
            )
        self.trained_with = getattr(self.optimizer, "name", type(self.optimizer).__name__)
        self.num_dims = data.num_dims
        self.num_classes = num_classes
        self._trained = True
        return self

    def classify_batch(self, data: DataMatrix) -> LabelRow:
        self._check_batch(data)
        augmented = np.vstack([data.values, np.ones(data.num_points)])
        if self.num_classes == 1:
            preds = np.zeros(data.num_points, dtype=np.int64)
        elif self.num_classes == 2:
            preds = (self.weights @ augmented > 0).astype(np.int64)
        else:
            preds = np.argmax(self.weights @ augmented, axis=0)
        return LabelRow(preds, self.num_classes)


def train_and_score(classifier, train_data, train_labels, test_data, test_labels, num_classes) -> float:
    """Train any classifier honoring the contract and return test accuracy."""
    classifier.train(train_data, train_labels, num_classes)
    predictions = classifier.classify_batch(test_data)
    return accuracy(predictions, test_labels)


_CLASSIFIERS = {
    "decision-tree": DecisionTree,
    "naive-bayes": NaiveBayes,
    "perceptron": Perceptron,
    "logistic-regression": LogisticRegression,
}


def classifier_from_name(name: str, **kwargs):
    """Build a shipped classifier by name; unknown names list the valid ones."""
    key = name.strip().lower()
    if key not in _CLASSIFIERS:
        raise ValueError(
            f"unknown classifier {name!r}; valid names: {', '.join(sorted(_CLASSIFIERS))}"
        )
    return _CLASSIFIERS[key](**kwargs)
