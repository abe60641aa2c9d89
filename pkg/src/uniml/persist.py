"""Save and load trained classifiers as line-oriented text files.

Every file starts with the header line ``uml-model <type> <version>``;
the payload after it is type-specific (layouts are documented in
docs/model_format.md).  Reals are written with repr so they round-trip
to the exact same float.  Loading a file whose version this code does
not know is an error, never a guess.
"""

from __future__ import annotations

import numpy as np

from .classifiers import DecisionTree, LogisticRegression, NaiveBayes, Perceptron
from .errors import ModelFormatError

__all__ = ["save_model", "load_model", "FORMAT_VERSION"]

FORMAT_VERSION = 1

_TYPE_NAMES = {
    DecisionTree: "decision-tree",
    NaiveBayes: "naive-bayes",
    Perceptron: "perceptron",
    LogisticRegression: "logistic-regression",
}


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def save_model(model, path):
    """Write a trained classifier to path; the type is taken from the object."""
    type_name = _TYPE_NAMES.get(type(model))
    if type_name is None:
        raise ValueError(f"cannot persist objects of type {type(model).__name__}")
    model._require_trained()
    lines = [
        f"uml-model {type_name} {FORMAT_VERSION}",
        f"num_dims {model.num_dims}",
        f"num_classes {model.num_classes}",
    ]
    if type_name == "decision-tree":
        lines.append(f"min_leaf_size {model.min_leaf_size}")
        lines.append(f"max_depth {-1 if model.max_depth is None else model.max_depth}")
        lines.append(f"num_nodes {model.num_nodes}")
        for i in range(model.num_nodes):
            lines.append(
                f"node {model._feature[i]} {repr(float(model._threshold[i]))} "
                f"{model._left[i]} {model._right[i]} {_floats(model._probs[i])}"
            )
    elif type_name == "naive-bayes":
        lines.append(f"priors {_floats(model.priors)}")
        for c in range(model.num_classes):
            lines.append(f"mean {_floats(model.means[c])}")
        for c in range(model.num_classes):
            lines.append(f"variance {_floats(model.variances[c])}")
    elif type_name == "perceptron":
        lines.append(f"max_epochs {model.max_epochs}")
        lines.append(f"converged {int(model.converged)}")
        lines.append(f"epochs_used {model.epochs_used}")
        for c in range(model.num_classes):
            lines.append(f"weights {_floats(model.weights[c])}")
    else:  # logistic-regression
        lines.append(f"trained_with {model.trained_with}")
        lines.append(f"penalty {repr(model.penalty)}")
        rows = model.weights if model.weights.ndim == 2 else model.weights[None, :]
        for row in rows:
            lines.append(f"weights {_floats(row)}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


class _Reader:
    """Line cursor over a model file that turns mistakes into ModelFormatError."""

    def __init__(self, path):
        self.path = str(path)
        # I/O trouble (missing file, permissions) propagates as OSError;
        # ModelFormatError is reserved for files we could read but not parse.
        with open(path, "r", encoding="utf-8") as handle:
            self.lines = handle.read().splitlines()
        self.pos = 0

    def fail(self, message):
        raise ModelFormatError(f"{self.path}:{self.pos}: {message}")

    def next_fields(self, key, count=None):
        if self.pos >= len(self.lines):
            self.pos = len(self.lines) + 1
            self.fail(f"unexpected end of file, wanted '{key}' line")
        line = self.lines[self.pos]
        self.pos += 1
        fields = line.split()
        if not fields or fields[0] != key:
            self.fail(f"expected '{key}' line, found {line!r}")
        if count is not None and len(fields) - 1 != count:
            self.fail(f"'{key}' line has {len(fields) - 1} values, wanted {count}")
        return fields[1:]

    def next_int(self, key):
        (raw,) = self.next_fields(key, 1)
        try:
            return int(raw)
        except ValueError:
            self.fail(f"'{key}' value {raw!r} is not an integer")

    def next_floats(self, key, count):
        fields = self.next_fields(key, count)
        try:
            return np.array([float(f) for f in fields], dtype=np.float64)
        except ValueError:
            self.fail(f"'{key}' line holds a non-numeric value")


def load_model(path):
    """Read a model file back into a trained classifier object."""
    reader = _Reader(path)
    if not reader.lines:
        reader.pos = 1
        reader.fail("empty model file")
    header = reader.lines[0].split()
    reader.pos = 1
    if len(header) != 3 or header[0] != "uml-model":
        raise ModelFormatError(
            f"{reader.path}:1: not a model file (header must be 'uml-model <type> <version>')"
        )
    type_name, raw_version = header[1], header[2]
    try:
        version = int(raw_version)
    except ValueError:
        raise ModelFormatError(f"{reader.path}:1: version {raw_version!r} is not an integer")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"{reader.path}:1: unsupported model version {version} (this build reads version {FORMAT_VERSION})"
        )
    loader = _LOADERS.get(type_name)
    if loader is None:
        raise ModelFormatError(
            f"{reader.path}:1: unknown model type {type_name!r}; "
            f"known types: {', '.join(sorted(_LOADERS))}"
        )
    num_dims = reader.next_int("num_dims")
    num_classes = reader.next_int("num_classes")
    if num_dims < 1 or num_classes < 1:
        reader.fail("num_dims and num_classes must be positive")
    model = loader(reader, num_dims, num_classes)
    model.num_dims = num_dims
    model.num_classes = num_classes
    model._trained = True
    if reader.pos < len(reader.lines) and any(l.strip() for l in reader.lines[reader.pos:]):
        reader.pos += 1
        reader.fail("trailing content after model payload")
    return model


def _load_decision_tree(reader, num_dims, num_classes):
    model = DecisionTree.__new__(DecisionTree)
    model.min_leaf_size = reader.next_int("min_leaf_size")
    raw_depth = reader.next_int("max_depth")
    model.max_depth = None if raw_depth < 0 else raw_depth
    num_nodes = reader.next_int("num_nodes")
    if num_nodes < 1:
        reader.fail("a tree holds at least one node")
    feature = np.empty(num_nodes, dtype=np.int64)
    threshold = np.empty(num_nodes, dtype=np.float64)
    left = np.empty(num_nodes, dtype=np.int64)
    right = np.empty(num_nodes, dtype=np.int64)
    probs = np.empty((num_nodes, num_classes), dtype=np.float64)
    for i in range(num_nodes):
        fields = reader.next_fields("node", 4 + num_classes)
        try:
            feature[i] = int(fields[0])
            threshold[i] = float(fields[1])
            left[i] = int(fields[2])
            right[i] = int(fields[3])
            probs[i] = [float(f) for f in fields[4:]]
        except ValueError:
            reader.fail("malformed node line")
        if feature[i] >= num_dims or (feature[i] >= 0) != (left[i] >= 0):
            reader.fail(f"node {i} is inconsistent")
        if max(left[i], right[i]) >= num_nodes:
            reader.fail(f"node {i} links past the node table")
    model._feature = feature
    model._threshold = threshold
    model._left = left
    model._right = right
    model._probs = probs
    model._leaf_pred = np.argmax(probs, axis=1)
    model.depth = None
    return model


def _load_naive_bayes(reader, num_dims, num_classes):
    model = NaiveBayes.__new__(NaiveBayes)
    model.priors = reader.next_floats("priors", num_classes)
    model.means = np.vstack(
        [reader.next_floats("mean", num_dims) for _ in range(num_classes)]
    )
    model.variances = np.vstack(
        [reader.next_floats("variance", num_dims) for _ in range(num_classes)]
    )
    if (model.variances <= 0).any():
        reader.fail("variances must be positive")
    model._finish_train()
    return model


def _load_perceptron(reader, num_dims, num_classes):
    model = Perceptron.__new__(Perceptron)
    model.max_epochs = reader.next_int("max_epochs")
    model.converged = bool(reader.next_int("converged"))
    model.epochs_used = reader.next_int("epochs_used")
    model.weights = np.vstack(
        [reader.next_floats("weights", num_dims + 1) for _ in range(num_classes)]
    )
    return model


def _load_logistic_regression(reader, num_dims, num_classes):
    model = LogisticRegression.__new__(LogisticRegression)
    (model.trained_with,) = reader.next_fields("trained_with", 1)
    model.penalty = float(reader.next_floats("penalty", 1)[0])
    model.optimizer = None
    rows = num_classes if num_classes >= 3 else 1
    weights = np.vstack(
        [reader.next_floats("weights", num_dims + 1) for _ in range(rows)]
    )
    model.weights = weights if num_classes >= 3 else weights[0]
    return model


_LOADERS = {
    "decision-tree": _load_decision_tree,
    "naive-bayes": _load_naive_bayes,
    "perceptron": _load_perceptron,
    "logistic-regression": _load_logistic_regression,
}
