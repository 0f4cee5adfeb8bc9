"""specsketch: spectral sketching of sparse graph Laplacians.

Recovers the first k Laplacian eigenvectors (up to rotation) by
low-pass polynomial filtering of k Gaussian random signals, with an
energy-based eigenvalue-count estimator for locating the cutoff, an
exact dense oracle for verification at small N, and clustering /
embedding quality metrics.
"""

from .counters import OpCounter
from .eigencount import (
    LambdaEstimate,
    eigencount,
    estimate_lambda_k_dichotomy,
    estimate_lambda_k_fast,
)
from .filters import (
    PolyFilter,
    apply_filter,
    exact_filter,
    gaussian_signals,
    ideal_lowpass_coeffs,
    jackson_coefficients,
)
from .graphs import (
    Graph,
    LaplacianOperator,
    PointCloud,
    build_knn_graph,
    complete_graph,
    cycle_graph,
    estimate_lambda_max,
    generate_sbm,
    generate_sensor_cloud,
    generate_swissroll,
    laplacian,
    load_graph,
    path_graph,
    save_graph,
    sensor_graph,
    swissroll_graph,
)
from .metrics import Partition, adjusted_rand, kmeans, mean_energy, modularity
from .oracle import ExactSpectrum, dense_eigendecomposition, true_count
from .sketch import (
    EigenspaceApprox,
    ProjectionStats,
    approximate_eigenspace,
    gaussian_projection_stats,
    raw_sketch,
)

__version__ = "0.1.0"

__all__ = [
    "OpCounter",
    "LambdaEstimate",
    "eigencount",
    "estimate_lambda_k_dichotomy",
    "estimate_lambda_k_fast",
    "PolyFilter",
    "apply_filter",
    "exact_filter",
    "gaussian_signals",
    "ideal_lowpass_coeffs",
    "jackson_coefficients",
    "Graph",
    "LaplacianOperator",
    "PointCloud",
    "build_knn_graph",
    "complete_graph",
    "cycle_graph",
    "estimate_lambda_max",
    "generate_sbm",
    "generate_sensor_cloud",
    "generate_swissroll",
    "laplacian",
    "load_graph",
    "path_graph",
    "save_graph",
    "sensor_graph",
    "swissroll_graph",
    "Partition",
    "adjusted_rand",
    "kmeans",
    "mean_energy",
    "modularity",
    "ExactSpectrum",
    "dense_eigendecomposition",
    "true_count",
    "EigenspaceApprox",
    "ProjectionStats",
    "approximate_eigenspace",
    "gaussian_projection_stats",
    "raw_sketch",
]
