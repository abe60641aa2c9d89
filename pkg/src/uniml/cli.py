"""Command-line surface: one ``uniml`` binary with eight subcommands.

Every command prints a one-line run report to stderr (command, wall-clock
duration, primary metric, exit code); result data goes to the output
files named by flags, and only covertype-demo and logreg print a result
line on stdout.  Exit codes: 0 success, 1 runtime or data error, 2 usage
error (bad flags, refusing to overwrite without --force, malformed model
files).  Commands with any randomness take --seed (default 42) and are
bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .classifiers import DecisionTree, LogisticRegression
from .cluster import boruvka_mst, kmeans
from .data import (
    LabelRow,
    accuracy,
    encode_labels,
    load_labels,
    load_matrix,
    save_labels,
    save_matrix,
    split,
)
from .errors import ModelFormatError, UnimlError
from .kdtree import build_kdtree, knn_search
from .metrics import metric_from_name
from .optimize import OptimizerConfig, optimizer_from_name
from .persist import load_model, save_model

__all__ = ["main"]


class UsageError(Exception):
    """A post-parse flag problem; reported like argparse errors (exit 2)."""


@dataclass
class RunReport:
    command: str
    duration: float
    metric_name: str | None = None
    metric_value: float | None = None
    exit_code: int = 0

    def render(self) -> str:
        metric = "-"
        if self.metric_name is not None:
            metric = f"{self.metric_name}={self.metric_value:g}"
        return (
            f"[uniml] command={self.command} duration={self.duration:.3f}s "
            f"metric={metric} exit={self.exit_code}"
        )


def _ratio_arg(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def _positive_int_arg(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _metric_arg(text: str):
    try:
        return metric_from_name(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _guard_outputs(args, *paths):
    if getattr(args, "force", False):
        return
    for path in paths:
        if Path(path).exists():
            raise UsageError(f"output file {path} exists; pass --force to overwrite")


def _load_dense_labels(path, num_classes=None):
    """Labels that are already class indices; num_classes defaults to max+1."""
    raw = load_labels(path)
    if num_classes is None:
        num_classes = int(raw.max()) + 1
    return LabelRow(raw, num_classes)


def _cmd_split(args):
    _guard_outputs(
        args, args.train_data, args.train_labels, args.test_data, args.test_labels
    )
    data = load_matrix(args.data)
    labels = _load_dense_labels(args.labels)
    parts = split(data, labels, args.test_ratio, args.seed)
    save_matrix(parts.train_data, args.train_data)
    save_labels(parts.train_labels, args.train_labels)
    save_matrix(parts.test_data, args.test_data)
    save_labels(parts.test_labels, args.test_labels)
    return ("test_points", float(parts.test_data.num_points))


def _cmd_tree_train(args):
    _guard_outputs(args, args.model)
    data = load_matrix(args.data)
    labels = _load_dense_labels(args.labels, args.num_classes)
    tree = DecisionTree(min_leaf_size=args.min_leaf_size, max_depth=args.max_depth)
    tree.train(data, labels, args.num_classes)
    save_model(tree, args.model)
    train_accuracy = accuracy(tree.classify_batch(data), labels)
    return ("train_accuracy", train_accuracy)


def _cmd_tree_predict(args):
    _guard_outputs(args, args.predictions)
    model = load_model(args.model)
    data = load_matrix(args.data)
    save_labels(model.classify_batch(data), args.predictions)
    return None


def _cmd_knn(args):
    _guard_outputs(args, args.neighbors)
    reference = load_matrix(args.reference)
    queries = reference if args.query is None else load_matrix(args.query)
    tree = build_kdtree(reference)
    result = knn_search(tree, queries, args.k, args.metric)
    with open(args.neighbors, "w", encoding="utf-8") as out:
        for q in range(queries.num_points):
            for idx, dist in zip(result.indices[q], result.distances[q]):
                out.write(f"{q},{idx},{float(dist)!r}\n")
    return ("mean_distance", float(result.distances.mean()))


def _cmd_kmeans(args):
    _guard_outputs(args, args.centroids, args.assignments)
    data = load_matrix(args.data)
    result = kmeans(data, args.k, max_iterations=args.max_iterations, seed=args.seed)
    save_matrix(result.centroids, args.centroids)
    save_labels(result.assignments, args.assignments)
    return ("objective", result.objective)


def _cmd_mst(args):
    _guard_outputs(args, args.edges)
    data = load_matrix(args.data)
    result = boruvka_mst(data, args.metric)
    with open(args.edges, "w", encoding="utf-8") as out:
        for a, b, weight in result.edges:
            out.write(f"{a},{b},{weight!r}\n")
    return ("total_weight", result.total_weight)


def _cmd_logreg(args):
    if args.model is not None:
        _guard_outputs(args, args.model)
    data = load_matrix(args.data)
    labels = _load_dense_labels(args.labels, args.num_classes)
    config = OptimizerConfig(
        step_size=args.step_size,
        max_iterations=args.max_iterations,
        tolerance=args.tolerance,
        seed=args.seed,
    )
    model = LogisticRegression(
        optimizer=optimizer_from_name(args.optimizer, config), penalty=args.penalty
    )
    model.train(data, labels, labels.num_classes)
    train_accuracy = accuracy(model.classify_batch(data), labels)
    if args.model is not None:
        save_model(model, args.model)
    print(f"Logistic regression training accuracy: {train_accuracy:.4f}.")
    return ("train_accuracy", train_accuracy)


def _stage(name, fn, *fn_args, **fn_kwargs):
    try:
        return fn(*fn_args, **fn_kwargs)
    except (UnimlError, ValueError, OSError) as exc:
        raise UnimlError(f"{name}: {exc}") from exc


def _cmd_covertype_demo(args):
    data = _stage("load data", load_matrix, args.data)
    raw = _stage("load labels", load_labels, args.labels)
    labels, _ = _stage("encode labels", encode_labels, raw)
    if labels.num_classes != 7:
        raise UnimlError(
            f"encode labels: expected 7 classes, found {labels.num_classes}"
        )
    parts = _stage("split", split, data, labels, 0.2, args.seed)
    tree = DecisionTree()
    _stage("train", tree.train, parts.train_data, parts.train_labels, 7)
    predictions = _stage("classify", tree.classify_batch, parts.test_data)
    test_accuracy = _stage("score", accuracy, predictions, parts.test_labels)
    print(
        f"Decision tree classifier accuracy on test set: {100.0 * test_accuracy:.4f}."
    )
    return ("accuracy", test_accuracy)


def _add_force(parser):
    parser.add_argument(
        "--force", action="store_true", help="overwrite existing output files"
    )


def _add_seed(parser):
    parser.add_argument(
        "--seed", type=int, default=42, help="random seed (default 42)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uniml", description="Compact machine-learning toolkit."
    )
    parser.add_argument(
        "--version", action="version", version=f"uniml {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("split", help="shuffle a dataset into train and test files")
    p.add_argument("--data", required=True, help="input CSV, one point per row")
    p.add_argument("--labels", required=True, help="input labels, one integer per line")
    p.add_argument("--test-ratio", type=_ratio_arg, required=True,
                   help="fraction of points held out, in [0, 1]")
    _add_seed(p)
    p.add_argument("--train-data", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--test-data", required=True)
    p.add_argument("--test-labels", required=True)
    _add_force(p)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("tree-train", help="train a decision tree and save the model")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True, help="class indices in [0, num-classes)")
    p.add_argument("--num-classes", type=_positive_int_arg, required=True)
    p.add_argument("--min-leaf-size", type=_positive_int_arg, default=10)
    p.add_argument("--max-depth", type=_positive_int_arg, default=None,
                   help="depth limit (default: unbounded)")
    p.add_argument("--model", required=True, help="output model file")
    _add_force(p)
    p.set_defaults(func=_cmd_tree_train)

    p = sub.add_parser("tree-predict", help="classify points with a saved tree model")
    p.add_argument("--model", required=True, help="model file from tree-train")
    p.add_argument("--data", required=True)
    p.add_argument("--predictions", required=True, help="output labels file")
    _add_force(p)
    p.set_defaults(func=_cmd_tree_predict)

    p = sub.add_parser("knn", help="exact k nearest neighbors of each query point")
    p.add_argument("--reference", required=True, help="reference points CSV")
    p.add_argument("--query", default=None,
                   help="query points CSV (default: the reference set)")
    p.add_argument("--k", type=_positive_int_arg, required=True)
    p.add_argument("--metric", type=_metric_arg, default="euclidean",
                   help="euclidean, manhattan, chebyshev, or lp:<p>")
    p.add_argument("--neighbors", required=True,
                   help="output CSV of queryIndex,neighborIndex,distance rows")
    _add_force(p)
    p.set_defaults(func=_cmd_knn)

    p = sub.add_parser("kmeans", help="cluster points with seeded k-means")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=_positive_int_arg, required=True)
    p.add_argument("--max-iterations", type=_positive_int_arg, default=1000)
    _add_seed(p)
    p.add_argument("--centroids", required=True, help="output CSV of k centroids")
    p.add_argument("--assignments", required=True,
                   help="output file of per-point cluster indices")
    _add_force(p)
    p.set_defaults(func=_cmd_kmeans)

    p = sub.add_parser("mst", help="minimum spanning tree over the points")
    p.add_argument("--data", required=True)
    p.add_argument("--metric", type=_metric_arg, default="euclidean",
                   help="euclidean, manhattan, chebyshev, or lp:<p>")
    p.add_argument("--edges", required=True, help="output CSV of a,b,weight rows")
    _add_force(p)
    p.set_defaults(func=_cmd_mst)

    p = sub.add_parser("logreg", help="train logistic regression, print its accuracy")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True, help="class indices in [0, num-classes)")
    p.add_argument("--num-classes", type=_positive_int_arg, default=None,
                   help="default: one more than the largest label")
    p.add_argument("--optimizer", choices=["gd", "sgd", "adam"], default="adam")
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--max-iterations", type=_positive_int_arg, default=500)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--penalty", type=float, default=1e-4,
                   help="L2 penalty on the non-bias weights (0 disables)")
    _add_seed(p)
    p.add_argument("--model", default=None, help="optional output model file")
    _add_force(p)
    p.set_defaults(func=_cmd_logreg)

    p = sub.add_parser(
        "covertype-demo",
        help="load, encode, split 80/20, train a tree, print test accuracy",
    )
    p.add_argument("--data", required=True, help="54-feature covertype CSV")
    p.add_argument("--labels", required=True, help="covertype labels (7 classes)")
    _add_seed(p)
    p.set_defaults(func=_cmd_covertype_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    exit_code = 0
    metric = None
    try:
        metric = args.func(args)
    except UsageError as exc:
        print(f"uniml: error: {exc}", file=sys.stderr)
        exit_code = 2
    except ModelFormatError as exc:
        print(f"uniml: error: {exc}", file=sys.stderr)
        exit_code = 2
    except (UnimlError, ValueError, OSError) as exc:
        print(f"uniml: error: {exc}", file=sys.stderr)
        exit_code = 1
    name, value = metric if metric is not None else (None, None)
    report = RunReport(
        command=args.command,
        duration=time.perf_counter() - start,
        metric_name=name,
        metric_value=value,
        exit_code=exit_code,
    )
    print(report.render(), file=sys.stderr)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
