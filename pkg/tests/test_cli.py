"""End-to-end checks of the command line interface."""

import re
import subprocess
import sys

import numpy as np
import pytest

from uniml import DataMatrix, save_matrix
from uniml.cli import main
from datasets import two_blobs


def write_points(path, values):
    save_matrix(DataMatrix(values), path)
    return str(path)


def write_labels(path, labels):
    path.write_text("".join(f"{v}\n" for v in labels))
    return str(path)


def read_lines(path):
    return path.read_text().splitlines()


def blob_files(tmp_path, num_points=400, seed=20, separation=6.0):
    data, labels = two_blobs(num_points=num_points, seed=seed, separation=separation)
    return (
        write_points(tmp_path / "data.csv", data.values),
        write_labels(tmp_path / "labels.txt", labels.labels),
    )


def standin_covertype(tmp_path, num_classes=7, per_class=50, seed=4):
    """Small 7-class stand-in with the covertype label convention (1-based)."""
    rng = np.random.default_rng(seed)
    blocks, labels = [], []
    for c in range(num_classes):
        center = rng.normal(0.0, 1.0, 6) * 8.0
        blocks.append(center[:, None] + rng.normal(0.0, 1.0, (6, per_class)))
        labels.extend([c + 1] * per_class)
    values = np.concatenate(blocks, axis=1)
    order = rng.permutation(values.shape[1])
    data_path = write_points(tmp_path / "cover_data.csv", values[:, order])
    labels_path = write_labels(
        tmp_path / "cover_labels.txt", [labels[i] for i in order]
    )
    return data_path, labels_path


# ----------------------------------------------------------------------- split


def test_split_counts_and_determinism(tmp_path, capsys):
    data = write_points(tmp_path / "d.csv", np.arange(10.0)[None, :])
    labels = write_labels(tmp_path / "l.txt", [0, 1] * 5)
    outputs = {}
    for tag in ("a", "b"):
        out = tmp_path / tag
        out.mkdir()
        code = main(
            [
                "split",
                "--data", data,
                "--labels", labels,
                "--test-ratio", "0.2",
                "--train-data", str(out / "train.csv"),
                "--train-labels", str(out / "train_labels.txt"),
                "--test-data", str(out / "test.csv"),
                "--test-labels", str(out / "test_labels.txt"),
            ]
        )
        assert code == 0
        outputs[tag] = {name.name: name.read_bytes() for name in out.iterdir()}
    assert len(read_lines(tmp_path / "a" / "train.csv")) == 8
    assert len(read_lines(tmp_path / "a" / "test.csv")) == 2
    assert len(read_lines(tmp_path / "a" / "train_labels.txt")) == 8
    assert len(read_lines(tmp_path / "a" / "test_labels.txt")) == 2
    assert outputs["a"] == outputs["b"]
    err = capsys.readouterr().err
    assert re.search(r"\[uniml\] command=split duration=\d+\.\d{3}s .*exit=0", err)


def test_split_bad_ratio_is_usage_error(tmp_path):
    data = write_points(tmp_path / "d.csv", np.arange(4.0)[None, :])
    labels = write_labels(tmp_path / "l.txt", [0, 0, 1, 1])
    with pytest.raises(SystemExit) as err:
        main(
            [
                "split",
                "--data", data,
                "--labels", labels,
                "--test-ratio", "1.5",
                "--train-data", str(tmp_path / "a.csv"),
                "--train-labels", str(tmp_path / "b.txt"),
                "--test-data", str(tmp_path / "c.csv"),
                "--test-labels", str(tmp_path / "d.txt"),
            ]
        )
    assert err.value.code == 2


# ------------------------------------------------------------ tree train/predict


def test_tree_round_trip_through_files(tmp_path):
    data = write_points(tmp_path / "d.csv", np.arange(10.0)[None, :])
    labels = write_labels(tmp_path / "l.txt", [0] * 5 + [1] * 5)
    model = str(tmp_path / "tree.uml")
    code = main(
        [
            "tree-train",
            "--data", data,
            "--labels", labels,
            "--num-classes", "2",
            "--min-leaf-size", "1",
            "--model", model,
        ]
    )
    assert code == 0
    predictions = tmp_path / "pred.txt"
    code = main(
        ["tree-predict", "--model", model, "--data", data,
         "--predictions", str(predictions)]
    )
    assert code == 0
    assert [int(v) for v in read_lines(predictions)] == [0] * 5 + [1] * 5


def test_tree_predict_corrupted_model_exits_2(tmp_path):
    bad = tmp_path / "bad.uml"
    bad.write_text("uml-model decision-tree 9\n")
    data = write_points(tmp_path / "d.csv", np.arange(4.0)[None, :])
    code = main(
        ["tree-predict", "--model", str(bad), "--data", data,
         "--predictions", str(tmp_path / "p.txt")]
    )
    assert code == 2


def test_output_overwrite_needs_force(tmp_path, capsys):
    data = write_points(tmp_path / "d.csv", np.arange(10.0)[None, :])
    labels = write_labels(tmp_path / "l.txt", [0] * 5 + [1] * 5)
    model = tmp_path / "tree.uml"
    model.write_text("already here\n")
    argv = [
        "tree-train",
        "--data", data,
        "--labels", labels,
        "--num-classes", "2",
        "--model", str(model),
    ]
    assert main(argv) == 2
    assert "already here" in model.read_text()
    assert "--force" in capsys.readouterr().err
    assert main(argv + ["--force"]) == 0
    assert model.read_text().startswith("uml-model decision-tree 1")


# ------------------------------------------------------------------------- knn


def test_knn_self_query_zero_distance(tmp_path):
    data = write_points(tmp_path / "d.csv", np.array([[0.0, 3.0, 10.0]]))
    neighbors = tmp_path / "nn.csv"
    code = main(["knn", "--reference", data, "--k", "1",
                 "--neighbors", str(neighbors)])
    assert code == 0
    rows = [line.split(",") for line in read_lines(neighbors)]
    assert [(int(q), int(i), float(d)) for q, i, d in rows] == [
        (0, 0, 0.0),
        (1, 1, 0.0),
        (2, 2, 0.0),
    ]


def test_knn_separate_query_file_and_metric(tmp_path):
    ref = write_points(tmp_path / "r.csv", np.array([[0.0, 1.0, 10.0]]))
    query = write_points(tmp_path / "q.csv", np.array([[0.4]]))
    neighbors = tmp_path / "nn.csv"
    code = main(["knn", "--reference", ref, "--query", query, "--k", "2",
                 "--metric", "manhattan", "--neighbors", str(neighbors)])
    assert code == 0
    rows = [line.split(",") for line in read_lines(neighbors)]
    assert [(int(q), int(i)) for q, i, _ in rows] == [(0, 0), (0, 1)]
    assert float(rows[0][2]) == pytest.approx(0.4)
    assert float(rows[1][2]) == pytest.approx(0.6)


def test_knn_k_too_large_exits_1(tmp_path):
    data = write_points(tmp_path / "d.csv", np.array([[0.0, 1.0]]))
    code = main(["knn", "--reference", data, "--k", "3",
                 "--neighbors", str(tmp_path / "nn.csv")])
    assert code == 1


# ---------------------------------------------------------------------- kmeans


def test_kmeans_outputs_and_determinism(tmp_path):
    data, _ = blob_files(tmp_path, num_points=60, seed=3)
    results = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        out.mkdir()
        code = main(
            ["kmeans", "--data", data, "--k", "2",
             "--centroids", str(out / "c.csv"),
             "--assignments", str(out / "a.txt"), "--seed", "7"]
        )
        assert code == 0
        results.append(
            ((out / "c.csv").read_bytes(), (out / "a.txt").read_bytes())
        )
    assert results[0] == results[1]
    assert len(read_lines(tmp_path / "a" / "c.csv")) == 2
    assignments = [int(v) for v in read_lines(tmp_path / "a" / "a.txt")]
    assert len(assignments) == 60
    assert set(assignments) == {0, 1}


def test_kmeans_k_out_of_range_exits_1(tmp_path):
    data = write_points(tmp_path / "d.csv", np.array([[0.0, 1.0]]))
    code = main(["kmeans", "--data", data, "--k", "5",
                 "--centroids", str(tmp_path / "c.csv"),
                 "--assignments", str(tmp_path / "a.txt")])
    assert code == 1


# ------------------------------------------------------------------------- mst


def test_mst_collinear_points(tmp_path, capsys):
    data = write_points(tmp_path / "d.csv", np.array([[0.0, 1.0, 3.0]]))
    edges = tmp_path / "edges.csv"
    code = main(["mst", "--data", data, "--edges", str(edges)])
    assert code == 0
    rows = [line.split(",") for line in read_lines(edges)]
    assert [(int(a), int(b), float(w)) for a, b, w in rows] == [
        (0, 1, 1.0),
        (1, 2, 2.0),
    ]
    assert "total_weight=3" in capsys.readouterr().err


# ---------------------------------------------------------------------- logreg


def test_logreg_prints_training_accuracy(tmp_path, capsys):
    data, labels = blob_files(tmp_path)
    code = main(["logreg", "--data", data, "--labels", labels,
                 "--optimizer", "adam"])
    assert code == 0
    out = capsys.readouterr().out
    match = re.fullmatch(
        r"Logistic regression training accuracy: (\d\.\d{4})\.\n", out
    )
    assert match, out
    assert float(match.group(1)) >= 0.99


def test_logreg_saves_loadable_model(tmp_path):
    from uniml import LogisticRegression, load_model

    data, labels = blob_files(tmp_path, num_points=100, seed=5)
    model = tmp_path / "lr.uml"
    code = main(["logreg", "--data", data, "--labels", labels,
                 "--optimizer", "gd", "--step-size", "0.5",
                 "--max-iterations", "200", "--model", str(model)])
    assert code == 0
    loaded = load_model(model)
    assert isinstance(loaded, LogisticRegression)
    assert loaded.trained_with == "gd"


# -------------------------------------------------------------- covertype demo


def test_covertype_demo_line_grammar_and_determinism(tmp_path, capsys):
    data, labels = standin_covertype(tmp_path)
    outputs = []
    for _ in range(2):
        code = main(["covertype-demo", "--data", data, "--labels", labels])
        assert code == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    assert re.fullmatch(
        r"Decision tree classifier accuracy on test set: \d+\.\d{4}\.\n",
        outputs[0],
    )


def test_covertype_demo_wrong_class_count_exits_1(tmp_path, capsys):
    data, labels = standin_covertype(tmp_path, num_classes=8)
    code = main(["covertype-demo", "--data", data, "--labels", labels])
    assert code == 1
    err = capsys.readouterr().err
    assert "expected 7 classes, found 8" in err


def test_covertype_demo_missing_file_exits_1(tmp_path, capsys):
    code = main(["covertype-demo", "--data", str(tmp_path / "nope.csv"),
                 "--labels", str(tmp_path / "nope.txt")])
    assert code == 1
    assert "load data" in capsys.readouterr().err


# --------------------------------------------------------------------- general


def test_unknown_flag_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["mst", "--data", "x.csv", "--edges", "y.csv", "--frobnicate"])
    assert err.value.code == 2


def test_malformed_csv_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,2.0\n3.0\n")
    code = main(["mst", "--data", str(bad), "--edges", str(tmp_path / "e.csv")])
    assert code == 1
    assert "bad.csv:2" in capsys.readouterr().err


def test_report_line_always_on_stderr(tmp_path, capsys):
    code = main(["knn", "--reference", str(tmp_path / "missing.csv"),
                 "--k", "1", "--neighbors", str(tmp_path / "nn.csv")])
    assert code == 1
    captured = capsys.readouterr()
    assert captured.out == ""
    assert re.search(r"\[uniml\] command=knn .*exit=1", captured.err)


def test_version_via_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "uniml.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "uniml 0.1.0"
