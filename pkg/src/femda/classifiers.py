"""Decision rules over fitted per-cluster models, plus a KNN baseline.

All score rows are oriented lower-is-better so prediction is a single argmin
whatever the method; argmin breaks ties toward the lowest class index.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gammaln

from ._backend import kernels
from .errors import DimensionMismatch, EmptyCluster, MissingNu
from .estimators import (
    ClusterModel,
    FitConfig,
    fit_femda,
    fit_gaussian_mle,
    fit_tqda,
    fit_tyler,
)

__all__ = [
    "Method",
    "FittedClassifier",
    "fit",
    "predict",
    "score_femda",
    "score_qda",
    "score_rqda",
    "score_tqda",
]


class Method(str, Enum):
    QDA = "qda"
    RQDA = "rqda"
    FEMDA = "femda"
    TQDA = "tqda"
    KNN = "knn"

    @classmethod
    def parse(cls, name) -> "Method":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown method {name!r}; expected one of {valid}") from None


_FITTERS = {
    Method.QDA: fit_gaussian_mle,
    Method.RQDA: fit_tyler,
    Method.FEMDA: fit_femda,
    Method.TQDA: fit_tqda,
}


@dataclass(frozen=True)
class FittedClassifier:
    """Immutable fitted classifier: per-class models, or retained data for KNN.

    For KNN the training work is building the neighbor index, so the tree is
    constructed at fit time and carried on the classifier.
    """

    method: Method
    class_count: int
    models: Optional[List[ClusterModel]] = None
    knn_data: Optional[np.ndarray] = None
    knn_labels: Optional[np.ndarray] = None
    knn_k: Optional[int] = None
    knn_tree: Optional[cKDTree] = None
    qda_logdet: bool = False

    @property
    def dim(self) -> int:
        if self.models is not None:
            return self.models[0].sigma.dim
        return self.knn_data.shape[1]


def fit(method, data, labels, cfg: FitConfig = FitConfig(), knn_k: int = 11) -> FittedClassifier:
    """Fit one per-class model with the method's estimator (KNN retains data).

    Every class in 0..K-1 must have at least one training row; estimator
    errors for individual classes propagate.
    """
    method = Method.parse(method)
    X = np.ascontiguousarray(data, dtype=float)
    y = np.asarray(labels, dtype=int)
    if X.ndim != 2:
        raise ValueError(f"expected an (n, m) data matrix, got shape {X.shape}")
    if len(X) != len(y):
        raise ValueError("data and labels have different lengths")
    if not np.all(np.isfinite(X)):
        raise ValueError("training data contains non-finite values")
    if len(y) == 0:
        raise EmptyCluster("no training data")
    k = int(y.max()) + 1
    if k < 2:
        raise ValueError("need at least two classes")
    counts = np.bincount(y, minlength=k)
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise EmptyCluster(f"no training rows for label(s) {missing.tolist()}")

    if method is Method.KNN:
        retained = X.copy()
        return FittedClassifier(
            method=method,
            class_count=k,
            knn_data=retained,
            knn_labels=y.copy(),
            knn_k=knn_k,
            knn_tree=cKDTree(retained),
        )
    fitter = _FITTERS[method]
    models = [fitter(X[y == label], cfg) for label in range(k)]
    return FittedClassifier(
        method=method,
        class_count=k,
        models=models,
        qda_logdet=cfg.qda_logdet,
    )


def _check_test_matrix(X, dim) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected an (n, m) test matrix, got shape {X.shape}")
    if X.shape[1] != dim:
        raise DimensionMismatch(f"test dimension {X.shape[1]} vs model dimension {dim}")
    return X


def _distances(X, model: ClusterModel) -> np.ndarray:
    return kernels.maha_sq_chol(X, np.ascontiguousarray(model.mu), model.sigma.chol)


def _score_matrix_femda(X, models) -> np.ndarray:
    m = X.shape[1]
    out = np.empty((X.shape[0], len(models)))
    for j, model in enumerate(models):
        d = _distances(X, model)
        # d == 0 (x exactly at a class mean) scores -inf and wins the argmin
        with np.errstate(divide="ignore"):
            out[:, j] = np.log(d) + model.sigma.logdet / m
    return out


def _score_matrix_qda(X, models, logdet_term) -> np.ndarray:
    out = np.empty((X.shape[0], len(models)))
    for j, model in enumerate(models):
        out[:, j] = _distances(X, model)
        if logdet_term:
            out[:, j] += model.sigma.logdet
    return out


def _score_matrix_tqda(X, models) -> np.ndarray:
    m = X.shape[1]
    out = np.empty((X.shape[0], len(models)))
    for j, model in enumerate(models):
        if model.nu is None:
            raise MissingNu("t-model scoring requires fitted degrees of freedom")
        nu = model.nu
        d = _distances(X, model)
        out[:, j] = (
            (1 + nu / m) * np.log1p(d / nu)
            + np.log(nu)
            + model.sigma.logdet / m
            + (2 / m) * (gammaln(nu / 2) - gammaln((nu + m) / 2))
        )
    return out


def score_femda(x, models) -> np.ndarray:
    """Scale-insensitive scores log(d_k) + log|Sigma_k|/m for one observation."""
    x = np.asarray(x, dtype=float)
    return _score_matrix_femda(_check_test_matrix(x[None, :], models[0].sigma.dim), models)[0]


def score_qda(x, models, logdet_term: bool = False) -> np.ndarray:
    """Squared Mahalanobis scores d_k, optionally plus log|Sigma_k|.

    The log-determinant term (textbook Gaussian log-likelihood) is off by
    default; without it the rule is not invariant to per-class rescaling.
    """
    x = np.asarray(x, dtype=float)
    return _score_matrix_qda(
        _check_test_matrix(x[None, :], models[0].sigma.dim), models, logdet_term
    )[0]


def score_rqda(x, models) -> np.ndarray:
    """Gaussian quadratic scores d_k + log|Sigma_k| on Tyler plug-ins.

    Meaningful because the Tyler fits are trace-normalized, which removes the
    scatter's scale ambiguity from the log-determinant term.
    """
    x = np.asarray(x, dtype=float)
    return _score_matrix_qda(_check_test_matrix(x[None, :], models[0].sigma.dim), models, True)[0]


def score_tqda(x, models) -> np.ndarray:
    """Student marginal scores for one observation (needs fitted nu)."""
    x = np.asarray(x, dtype=float)
    return _score_matrix_tqda(_check_test_matrix(x[None, :], models[0].sigma.dim), models)[0]


def _score_matrix(clf: FittedClassifier, X) -> np.ndarray:
    if clf.method is Method.FEMDA:
        return _score_matrix_femda(X, clf.models)
    if clf.method is Method.QDA:
        return _score_matrix_qda(X, clf.models, clf.qda_logdet)
    if clf.method is Method.RQDA:
        return _score_matrix_qda(X, clf.models, True)
    if clf.method is Method.TQDA:
        return _score_matrix_tqda(X, clf.models)
    raise ValueError(f"no score matrix for method {clf.method}")


def _predict_knn(clf: FittedClassifier, X) -> np.ndarray:
    if len(X) == 0:
        return np.empty(0, dtype=int)
    k = min(clf.knn_k, len(clf.knn_data))
    tree = clf.knn_tree if clf.knn_tree is not None else cKDTree(clf.knn_data)
    _, idx = tree.query(X, k=k)
    votes = clf.knn_labels[np.atleast_2d(idx.T).T]
    out = np.empty(len(X), dtype=int)
    for i in range(len(X)):
        out[i] = np.bincount(votes[i]).argmax()  # argmax ties -> lowest label
    return out


def predict(clf: FittedClassifier, data) -> np.ndarray:
    """Per-row argmin of the method's scores (KNN: majority vote)."""
    X = _check_test_matrix(data, clf.dim)
    if clf.method is Method.KNN:
        return _predict_knn(clf, X)
    if len(X) == 0:
        return np.empty(0, dtype=int)
    return _score_matrix(clf, X).argmin(axis=1)
