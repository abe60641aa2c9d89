"""Acceptance gate: the eight headline behaviors, one printed verdict each.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines.
Criterion 1 needs the covertype dataset on disk; see the README for how to
fetch it and where to put it. Without the files that criterion is skipped.
"""

import inspect
import io
import itertools
import math
import os
import re
import time
from contextlib import contextmanager, redirect_stdout
from pathlib import Path

import numpy as np
import pytest

from uniml import (
    Adam,
    DataMatrix,
    DataFormatError,
    DecisionTree,
    GradientDescent,
    LabelRow,
    LogisticRegression,
    LpMetric,
    NaiveBayes,
    OptimizerConfig,
    Perceptron,
    RosenbrockObjective,
    SGD,
    SphereObjective,
    boruvka_mst,
    brute_force_knn,
    build_kdtree,
    finite_difference_gradient,
    kmeans,
    knn_search,
    load_matrix,
    metric_from_name,
    save_matrix,
    split,
    train_and_score,
)
from uniml.classifiers import LogisticLoss
from uniml.cli import main as cli_main
from datasets import two_blobs


@contextmanager
def criterion(number, name):
    """Print one PASS/FAIL/SKIP verdict line for an acceptance criterion."""
    try:
        yield
    except pytest.skip.Exception:
        print(f"criterion {number} ({name}): SKIP")
        raise
    except BaseException:
        print(f"criterion {number} ({name}): FAIL")
        raise
    print(f"criterion {number} ({name}): PASS")


def run_cli(argv):
    """Run the CLI in-process, returning (exit_code, stdout_text)."""
    captured = io.StringIO()
    with redirect_stdout(captured):
        code = cli_main(argv)
    return code, captured.getvalue()


# -------------------------------------------------- 1. covertype reproduction


def covertype_files():
    roots = []
    env = os.environ.get("UNIML_COVERTYPE")
    if env:
        roots.append(Path(env))
    roots.append(Path(__file__).resolve().parent.parent / "data" / "covertype")
    for root in roots:
        data = root / "covertype_data.csv"
        labels = root / "covertype_labels.csv"
        if data.exists() and labels.exists():
            return data, labels
    return None


def demo_accuracy(data_path, labels_path):
    start = time.perf_counter()
    code, out = run_cli(
        ["covertype-demo", "--data", str(data_path), "--labels", str(labels_path)]
    )
    elapsed = time.perf_counter() - start
    assert code == 0
    match = re.fullmatch(
        r"Decision tree classifier accuracy on test set: (\d+\.\d{4})\.\n", out
    )
    assert match, f"unexpected output: {out!r}"
    return float(match.group(1)), elapsed


def test_criterion_1_covertype(tmp_path):
    with criterion(1, "covertype reproduction"):
        found = covertype_files()
        if found is None:
            pytest.skip(
                "covertype dataset not present; set UNIML_COVERTYPE or place "
                "covertype_data.csv and covertype_labels.csv under "
                "data/covertype/ (see README)"
            )
        data_path, labels_path = found

        # smoke tier: seeded 50,000-point subsample, under a minute, >= 60%
        full = load_matrix(data_path)
        raw_labels = [
            line for line in labels_path.read_text().splitlines() if line.strip()
        ]
        assert full.num_points == len(raw_labels)
        picks = np.sort(
            np.random.default_rng(42).choice(full.num_points, 50_000, replace=False)
        )
        sample_data = tmp_path / "sample_data.csv"
        sample_labels = tmp_path / "sample_labels.csv"
        save_matrix(DataMatrix(full.values[:, picks]), sample_data)
        sample_labels.write_text("".join(f"{raw_labels[i]}\n" for i in picks))
        smoke_accuracy, smoke_elapsed = demo_accuracy(sample_data, sample_labels)
        assert smoke_elapsed < 60.0, f"smoke tier took {smoke_elapsed:.1f}s"
        assert smoke_accuracy >= 60.0, f"smoke accuracy {smoke_accuracy}"

        # full tier: the published workflow end to end
        full_accuracy, full_elapsed = demo_accuracy(data_path, labels_path)
        assert full_elapsed < 600.0, f"full tier took {full_elapsed:.1f}s"
        assert 65.0 <= full_accuracy <= 78.0, f"full accuracy {full_accuracy}"


# ---------------------------------------------------------- 2. k-NN exactness


def test_criterion_2_knn_exactness():
    with criterion(2, "k-NN exactness"):
        sizes = itertools.cycle([50, 200, 1000])
        dims = itertools.cycle([2, 5, 10])
        ks = itertools.cycle([1, 5, 10])
        metrics = itertools.cycle(["euclidean", "manhattan", "chebyshev"])
        for instance in range(20):
            rng = np.random.default_rng(1000 + instance)
            n, d, k = next(sizes), next(dims), next(ks)
            metric = metric_from_name(next(metrics))
            data = DataMatrix(rng.normal(size=(d, n)) * 10.0)
            queries = DataMatrix(rng.normal(size=(d, 15)) * 10.0)
            tree = build_kdtree(data)
            got = knn_search(tree, queries, k, metric)
            want = brute_force_knn(data, queries, k, metric)
            assert np.array_equal(got.indices, want.indices), f"instance {instance}"
            assert np.allclose(got.distances, want.distances, rtol=0.0, atol=1e-12)


# -------------------------------------------------- 3. optimizer correctness


def test_criterion_3_optimizers():
    with criterion(3, "optimizer correctness"):
        sphere = SphereObjective(2)
        gd = GradientDescent(
            OptimizerConfig(step_size=0.1, max_iterations=10000, tolerance=1e-14)
        ).optimize(sphere, [1.0, 1.0])
        sgd = SGD(
            OptimizerConfig(step_size=0.1, max_iterations=10000, tolerance=1e-14)
        ).optimize(sphere, [1.0, 1.0])
        adam = Adam(
            OptimizerConfig(step_size=0.1, max_iterations=500, tolerance=1e-12)
        ).optimize(sphere, [5.0, 5.0])
        for result in (gd, sgd, adam):
            assert result.final_objective < 1e-6

        rosenbrock = RosenbrockObjective()
        tuned = OptimizerConfig(step_size=1e-3, max_iterations=30000, tolerance=1e-14)
        hill = GradientDescent(tuned).optimize(rosenbrock, [-1.2, 1.0])
        assert hill.final_objective < 1e-4

        rng = np.random.default_rng(2024)
        loss_rng = np.random.default_rng(2025)
        augmented = np.vstack([loss_rng.normal(size=(3, 30)), np.ones(30)])
        targets = loss_rng.integers(0, 2, 30).astype(float)
        objectives = [
            (SphereObjective(4), lambda: rng.normal(0.0, 3.0, 4)),
            (rosenbrock, lambda: rng.normal(0.0, 2.0, 2)),
            (
                LogisticLoss(augmented, targets, penalty=1e-3),
                lambda: rng.normal(0.0, 2.0, 4),
            ),
        ]
        for objective, draw in objectives:
            for _ in range(100):
                x = draw()
                analytic = objective.gradient(x)
                approx = finite_difference_gradient(objective, x, 1e-6)
                denom = max(1.0, float(np.linalg.norm(analytic)))
                assert np.linalg.norm(analytic - approx) / denom < 1e-4


# -------------------------------------------------- 4. k-means monotonicity


def test_criterion_4_kmeans_monotone():
    with criterion(4, "k-means monotonicity"):
        ks = itertools.cycle([2, 5, 10])
        for seed in range(50):
            rng = np.random.default_rng(3000 + seed)
            data = DataMatrix(rng.normal(size=(5, 500)) * 4.0)
            result = kmeans(data, next(ks), seed=seed)
            history = np.asarray(result.objective_history)
            drops = np.diff(history)
            assert np.all(drops <= 1e-9 * np.maximum(1.0, history[:-1])), seed

        rng = np.random.default_rng(3100)
        data = DataMatrix(rng.normal(size=(5, 500)))
        assert kmeans(data, 500).objective < 1e-18


# ---------------------------------------------- 5. MST oracle equivalence


def kruskal_total(data, metric):
    n = data.num_points
    pairs = sorted(
        (metric.evaluate(data.point(i), data.point(j)), i, j)
        for i in range(n)
        for j in range(i + 1, n)
    )
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    weights = []
    for w, i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            weights.append(w)
    return math.fsum(weights)


def test_criterion_5_mst_oracle():
    with criterion(5, "MST oracle equivalence"):
        metrics = [LpMetric(2), LpMetric(1)]
        for instance in range(50):
            rng = np.random.default_rng(4000 + instance)
            n = int(rng.integers(2, 31))
            data = DataMatrix(rng.normal(size=(3, n)) * 6.0)
            metric = metrics[instance % 2]
            result = boruvka_mst(data, metric)
            assert result.total_weight == kruskal_total(data, metric), instance


# -------------------------------------------------- 6. API substitutability


def test_criterion_6_substitutability():
    with criterion(6, "API substitutability"):
        data, labels = two_blobs(num_points=1000, num_dims=5, seed=1234)
        parts = split(data, labels, 0.2, seed=42)
        classifiers = [
            DecisionTree(),
            NaiveBayes(),
            Perceptron(),
            LogisticRegression(),
        ]
        for model in classifiers:
            score = train_and_score(
                model,
                parts.train_data,
                parts.train_labels,
                parts.test_data,
                parts.test_labels,
                2,
            )
            assert score >= 0.90, type(model).__name__

        source = inspect.getsource(train_and_score)
        for token in (
            "if ",
            "isinstance",
            "DecisionTree",
            "NaiveBayes",
            "Perceptron",
            "LogisticRegression",
        ):
            assert token not in source, f"harness branches on {token!r}"


# ----------------------------------------------------------- 7. determinism


def test_criterion_7_determinism(tmp_path):
    with criterion(7, "determinism"):
        rng = np.random.default_rng(9)
        data_path = tmp_path / "data.csv"
        labels_path = tmp_path / "labels.txt"
        points = np.concatenate(
            [rng.normal(-3.0, 1.0, (4, 100)), rng.normal(3.0, 1.0, (4, 100))], axis=1
        )
        save_matrix(DataMatrix(points), data_path)
        labels_path.write_text("".join("0\n" for _ in range(100)) + "".join("1\n" for _ in range(100)))

        seven_points = np.concatenate(
            [rng.normal(i * 6.0, 1.0, (3, 40)) for i in range(7)], axis=1
        )
        seven_data = tmp_path / "seven.csv"
        seven_labels = tmp_path / "seven_labels.txt"
        save_matrix(DataMatrix(seven_points), seven_data)
        seven_labels.write_text("".join(f"{c + 1}\n" for c in range(7) for _ in range(40)))

        def pipeline_outputs(tag):
            out = tmp_path / tag
            out.mkdir()
            stdout_log = []

            code, text = run_cli(
                [
                    "split",
                    "--data", str(data_path),
                    "--labels", str(labels_path),
                    "--test-ratio", "0.25",
                    "--train-data", str(out / "train.csv"),
                    "--train-labels", str(out / "train_l.txt"),
                    "--test-data", str(out / "test.csv"),
                    "--test-labels", str(out / "test_l.txt"),
                ]
            )
            assert code == 0
            stdout_log.append(text)

            for optimizer in ("sgd", "adam"):
                code, text = run_cli(
                    [
                        "logreg",
                        "--data", str(data_path),
                        "--labels", str(labels_path),
                        "--optimizer", optimizer,
                        "--max-iterations", "60",
                        "--model", str(out / f"{optimizer}.uml"),
                    ]
                )
                assert code == 0
                stdout_log.append(text)

            code, text = run_cli(
                [
                    "kmeans",
                    "--data", str(data_path),
                    "--k", "4",
                    "--centroids", str(out / "centroids.csv"),
                    "--assignments", str(out / "assign.txt"),
                ]
            )
            assert code == 0
            stdout_log.append(text)

            code, text = run_cli(
                ["covertype-demo", "--data", str(seven_data),
                 "--labels", str(seven_labels)]
            )
            assert code == 0
            stdout_log.append(text)

            files = {
                p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()
            }
            return stdout_log, files

        first = pipeline_outputs("run1")
        second = pipeline_outputs("run2")
        assert first == second


# ----------------------------------------------- 8. degenerate input suite


def test_criterion_8_degenerate_inputs(tmp_path):
    with criterion(8, "degenerate inputs"):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(DataFormatError):
            load_matrix(empty)

        ragged = tmp_path / "ragged.csv"
        ragged.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(DataFormatError) as err:
            load_matrix(ragged)
        assert "ragged.csv:2" in str(err.value)

        # a single point is legal everywhere it can be
        lone = DataMatrix([[5.0], [7.0]])
        lone_labels = LabelRow([0], 1)
        for cls in (DecisionTree, NaiveBayes, Perceptron, LogisticRegression):
            model = cls().train(lone, lone_labels, 1)
            assert model.classify_point([5.0, 7.0]) == 0
        assert kmeans(lone, 1).objective == 0.0
        assert boruvka_mst(lone, LpMetric(2)).edges == []

        # constant features must not divide by zero anywhere
        flat = DataMatrix(np.ones((3, 20)))
        flat_labels = LabelRow([0] * 10 + [1] * 10, 2)
        for cls in (DecisionTree, NaiveBayes, Perceptron, LogisticRegression):
            out = cls().train(flat, flat_labels, 2).classify_batch(flat)
            assert out.labels.shape == (20,)

        # single-class labels train and always predict that class
        rng = np.random.default_rng(8)
        spread = DataMatrix(rng.normal(size=(2, 30)))
        one_class = LabelRow(np.zeros(30, dtype=int), 1)
        for cls in (DecisionTree, NaiveBayes, Perceptron, LogisticRegression):
            out = cls().train(spread, one_class, 1).classify_batch(spread)
            assert np.all(out.labels == 0)

        # k out of range is a clean ValueError, for clustering and search
        with pytest.raises(ValueError):
            kmeans(spread, 0)
        with pytest.raises(ValueError):
            kmeans(spread, 31)
        tree = build_kdtree(spread)
        with pytest.raises(ValueError):
            knn_search(tree, spread, 31, LpMetric(2))
        with pytest.raises(ValueError):
            brute_force_knn(spread, spread, 0, LpMetric(2))
