"""Robust discriminant analysis with flexible elliptical models.

Estimators and decision rules for four quadratic discriminant methods (a
scale-insensitive robust rule, plain Gaussian QDA, a Tyler-based robust QDA,
and a Student-t variant), a seeded elliptical mixture generator with
contamination injection, estimator-quality metrics, and a time-budgeted
benchmark harness with a CSV-emitting CLI.
"""

from ._backend import HAVE_EXT, backend_name
from .classifiers import FittedClassifier, Method, fit, predict
from .datagen import (
    ClusterSpec,
    GeneralizedGaussian,
    StudentT,
    SyntheticConfig,
    contaminate,
    generate_mixture,
)
from .estimators import (
    ClusterModel,
    FitConfig,
    fit_femda,
    fit_gaussian_mle,
    fit_tqda,
    fit_tyler,
)
from .metrics import EvalReport, accuracy, mu_relative_error
from .spd import (
    SpdMatrix,
    cholesky,
    mahalanobis_sq,
    spd_geodesic_distance,
    spd_geodesic_distance_scale_matched,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "HAVE_EXT",
    "backend_name",
    "Method",
    "FittedClassifier",
    "fit",
    "predict",
    "FitConfig",
    "ClusterModel",
    "fit_gaussian_mle",
    "fit_femda",
    "fit_tyler",
    "fit_tqda",
    "SyntheticConfig",
    "ClusterSpec",
    "GeneralizedGaussian",
    "StudentT",
    "generate_mixture",
    "contaminate",
    "EvalReport",
    "accuracy",
    "mu_relative_error",
    "SpdMatrix",
    "cholesky",
    "mahalanobis_sq",
    "spd_geodesic_distance",
    "spd_geodesic_distance_scale_matched",
]
