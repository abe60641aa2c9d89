"""uniml: a compact machine-learning toolkit with one classifier contract.

Datasets are dense float64 matrices with one point per column; every
classifier exposes train / classify_point / classify_batch, and metrics,
kernels, and optimizers are plain objects any consumer accepts, so
behavior is swapped by passing a different object, not by editing the
consumer.
"""

from .classifiers import (
    DecisionTree,
    LogisticRegression,
    NaiveBayes,
    Perceptron,
    classifier_from_name,
    train_and_score,
)
from .cluster import KMeansResult, MstResult, boruvka_mst, kmeans
from .data import (
    DataMatrix,
    LabelEncoding,
    LabelRow,
    SplitResult,
    accuracy,
    encode_labels,
    load_labels,
    load_matrix,
    save_labels,
    save_matrix,
    split,
)
from .errors import (
    DataFormatError,
    ModelFormatError,
    NonFiniteError,
    NotTrainedError,
    UnimlError,
)
from .kdtree import (
    KdTree,
    NeighborResult,
    brute_force_knn,
    build_kdtree,
    knn_search,
    range_search,
)
from .metrics import (
    CHEBYSHEV,
    EUCLIDEAN,
    MANHATTAN,
    GaussianKernel,
    LinearKernel,
    LpMetric,
    PolynomialKernel,
    metric_from_name,
)
from .optimize import (
    Adam,
    GradientDescent,
    OptimizationResult,
    OptimizerConfig,
    RosenbrockObjective,
    SGD,
    SimulatedAnnealing,
    SphereObjective,
    finite_difference_gradient,
    optimizer_from_name,
)
from .persist import load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "DataMatrix",
    "LabelRow",
    "LabelEncoding",
    "SplitResult",
    "load_matrix",
    "save_matrix",
    "load_labels",
    "save_labels",
    "encode_labels",
    "split",
    "accuracy",
    "LpMetric",
    "EUCLIDEAN",
    "MANHATTAN",
    "CHEBYSHEV",
    "metric_from_name",
    "GaussianKernel",
    "LinearKernel",
    "PolynomialKernel",
    "KdTree",
    "NeighborResult",
    "build_kdtree",
    "knn_search",
    "range_search",
    "brute_force_knn",
    "OptimizerConfig",
    "OptimizationResult",
    "GradientDescent",
    "SGD",
    "Adam",
    "SimulatedAnnealing",
    "optimizer_from_name",
    "finite_difference_gradient",
    "SphereObjective",
    "RosenbrockObjective",
    "DecisionTree",
    "NaiveBayes",
    "Perceptron",
    "LogisticRegression",
    "train_and_score",
    "classifier_from_name",
    "save_model",
    "load_model",
    "KMeansResult",
    "kmeans",
    "MstResult",
    "boruvka_mst",
    "UnimlError",
    "DataFormatError",
    "ModelFormatError",
    "NotTrainedError",
    "NonFiniteError",
    "__version__",
]
