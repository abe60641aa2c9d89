"""Dataset handling: CSV ingestion, label encoding, splitting, scoring.

Datasets are dense float64 matrices laid out dimensions x points: point j
is column j.  CSV files on disk keep the opposite convention (one point
per row, comma separated, no header), so the loader transposes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataFormatError

__all__ = [
    "DataMatrix",
    "LabelRow",
    "SplitResult",
    "LabelEncoding",
    "load_matrix",
    "save_matrix",
    "load_labels",
    "save_labels",
    "encode_labels",
    "split",
    "accuracy",
]


class DataMatrix:
    """Dense numeric dataset, shape num_dims x num_points.

    Treat instances as immutable after construction; they are safe to
    share across threads.  All entries are finite.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got ndim={arr.ndim}")
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("data matrix contains NaN or infinite entries")
        self.values = arr

    @property
    def num_dims(self) -> int:
        return self.values.shape[0]

    @property
    def num_points(self) -> int:
        return self.values.shape[1]

    def point(self, j: int) -> np.ndarray:
        """Column j as a 1-D view."""
        return self.values[:, j]

    def __repr__(self):
        return f"DataMatrix({self.num_dims}x{self.num_points})"


class LabelRow:
    """Per-point class indices in [0, num_classes)."""

    __slots__ = ("labels", "num_classes")

    def __init__(self, labels, num_classes: int):
        arr = np.asarray(labels, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError(f"labels must be 1-D, got ndim={arr.ndim}")
        num_classes = int(num_classes)
        if num_classes < 1:
            raise ValueError("num_classes must be at least 1")
        if arr.size:
            lo, hi = arr.min(), arr.max()
            if lo < 0 or hi >= num_classes:
                raise ValueError(
                    f"labels must lie in [0, {num_classes}), found range [{lo}, {hi}]"
                )
        self.labels = arr
        self.num_classes = num_classes

    def __len__(self):
        return self.labels.size

    def __repr__(self):
        return f"LabelRow(n={len(self)}, num_classes={self.num_classes})"


@dataclass
class SplitResult:
    train_data: DataMatrix
    test_data: DataMatrix
    train_labels: LabelRow
    test_labels: LabelRow


@dataclass
class LabelEncoding:
    """Bijection between raw label tokens and dense indices."""

    forward: dict
    backward: np.ndarray

    def decode(self, labels: LabelRow) -> np.ndarray:
        """Map encoded labels back to their raw tokens."""
        return self.backward[labels.labels]


def _diagnose_matrix_text(path, text):
    """Scan CSV text line by line and return a DataFormatError, or None.

    Slow path, only used once the fast parser has rejected the file (or
    produced non-finite values); pins the failure to a 1-based line.
    """
    expected_fields = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip() == "":
            return DataFormatError(path, "blank line", line=lineno)
        fields = line.split(",")
        if expected_fields is None:
            expected_fields = len(fields)
        elif len(fields) != expected_fields:
            return DataFormatError(
                path,
                f"ragged row: expected {expected_fields} fields, found {len(fields)}",
                line=lineno,
            )
        for tok in fields:
            try:
                value = float(tok)
            except ValueError:
                return DataFormatError(
                    path, f"non-numeric token {tok.strip()!r}", line=lineno
                )
            if not math.isfinite(value):
                return DataFormatError(
                    path, f"non-finite value {tok.strip()!r}", line=lineno
                )
    return None


def load_matrix(path) -> DataMatrix:
    """Load a CSV file of one point per row into a DataMatrix.

    The file's rows become columns, so a file of n lines with d fields
    each yields a d x n matrix.  Raises DataFormatError (with the
    offending 1-based line number where applicable) on empty input,
    ragged rows, non-numeric tokens, or non-finite values.
    """
    path = Path(path)
    text = path.read_text()
    if text.strip() == "":
        raise DataFormatError(path, "empty input")
    try:
        frame = pd.read_csv(
            StringIO(text),
            header=None,
            dtype=np.float64,
            skip_blank_lines=False,
            # the default float parser can be off by half an ulp; this one
            # is exact, which save_matrix relies on for lossless round trips
            float_precision="round_trip",
        )
        arr = frame.to_numpy(dtype=np.float64)
    except Exception as exc:
        err = _diagnose_matrix_text(path, text)
        if err is not None:
            raise err from None
        raise DataFormatError(path, f"could not parse CSV: {exc}") from exc
    if not np.all(np.isfinite(arr)):
        err = _diagnose_matrix_text(path, text)
        if err is not None:
            raise err
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise DataFormatError(path, "non-finite value", line=int(bad[0]) + 1)
    return DataMatrix(arr.T)


def save_matrix(data: DataMatrix, path) -> None:
    """Write a DataMatrix as CSV, one point per row (inverse of load_matrix).

    Floats are written in shortest round-trip form, so load_matrix on the
    result reproduces the matrix exactly.
    """
    pd.DataFrame(data.values.T).to_csv(path, header=False, index=False)


def load_labels(path) -> np.ndarray:
    """Load raw integer labels: one per line, or a single comma-separated line.

    Returns the raw label values in file order (no re-encoding).  Raises
    DataFormatError on empty input, non-integer tokens, or negative values.
    """
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if not lines or text.strip() == "":
        raise DataFormatError(path, "empty input")
    if len(lines) == 1 and "," in lines[0]:
        tokens = [(1, tok) for tok in lines[0].split(",")]
    else:
        tokens = []
        for lineno, line in enumerate(lines, start=1):
            if "," in line:
                raise DataFormatError(
                    path,
                    "label files hold one integer per line "
                    "(or a single comma-separated line)",
                    line=lineno,
                )
            tokens.append((lineno, line))
    out = np.empty(len(tokens), dtype=np.int64)
    for i, (lineno, tok) in enumerate(tokens):
        try:
            value = int(tok.strip())
        except ValueError:
            raise DataFormatError(
                path, f"non-integer token {tok.strip()!r}", line=lineno
            ) from None
        if value < 0:
            raise DataFormatError(path, f"negative label {value}", line=lineno)
        out[i] = value
    return out


def save_labels(labels, path) -> None:
    """Write integer labels one per line; accepts a LabelRow or raw sequence."""
    arr = labels.labels if isinstance(labels, LabelRow) else np.asarray(labels)
    Path(path).write_text("".join(f"{int(v)}\n" for v in arr))


def encode_labels(raw) -> tuple[LabelRow, LabelEncoding]:
    """Densely re-encode raw label tokens in order of first appearance.

    decode(encode(x)) restores x exactly for every token.
    """
    arr = np.asarray(raw, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("raw labels must be a non-empty 1-D sequence")
    codes, uniques = pd.factorize(arr)
    backward = np.asarray(uniques, dtype=np.int64)
    forward = {int(tok): i for i, tok in enumerate(backward)}
    return LabelRow(codes, len(backward)), LabelEncoding(forward, backward)


def _test_count(num_points: int, test_ratio: float) -> int:
    # Round half up, so a 0.5 boundary always lands on the same side.
    return int(math.floor(test_ratio * num_points + 0.5))


def split(data: DataMatrix, labels: LabelRow, test_ratio: float, seed: int) -> SplitResult:
    """Random train/test partition with round(test_ratio * n) test points.

    A Fisher-Yates shuffle of the point indices is driven entirely by
    ``seed``; the first round(test_ratio * n) shuffled points form the
    test set.  Point/label pairing is preserved, and identical inputs
    with the same seed always give identical output.
    """
    if len(labels) != data.num_points:
        raise ValueError(
            f"labels length {len(labels)} != num_points {data.num_points}"
        )
    if not 0.0 <= test_ratio <= 1.0:
        raise ValueError(f"test_ratio must lie in [0, 1], got {test_ratio}")
    n = data.num_points
    n_test = _test_count(n, test_ratio)
    perm = np.random.default_rng(seed).permutation(n)
    test_idx, train_idx = perm[:n_test], perm[n_test:]
    return SplitResult(
        train_data=DataMatrix(data.values[:, train_idx]),
        test_data=DataMatrix(data.values[:, test_idx]),
        train_labels=LabelRow(labels.labels[train_idx], labels.num_classes),
        test_labels=LabelRow(labels.labels[test_idx], labels.num_classes),
    )


def _label_array(x) -> np.ndarray:
    return x.labels if isinstance(x, LabelRow) else np.asarray(x, dtype=np.int64)


def accuracy(predictions, truth) -> float:
    """Fraction of positions where predictions equal the true labels."""
    p, t = _label_array(predictions), _label_array(truth)
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} predictions vs {t.size} labels")
    if p.size == 0:
        raise ValueError("accuracy of empty label sequences is undefined")
    return float(np.count_nonzero(p == t)) / p.size
