"""Classification accuracy and estimator-quality metrics."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .datagen import ClusterSpec
from .errors import CountMismatch, EmptyInput, LengthMismatch, ZeroTruthNorm
from .estimators import ClusterModel
from .spd import spd_geodesic_distance, spd_geodesic_distance_scale_matched

__all__ = ["EvalReport", "accuracy", "mu_relative_error", "cluster_matched_report"]


@dataclass(frozen=True)
class EvalReport:
    """One evaluation row: accuracy, estimation errors and timings."""

    accuracy: float
    mu_rmse_pct: Optional[float]
    sigma_riem: Optional[float]
    sigma_riem_scale_matched: Optional[float]
    train_time_s: float
    predict_time_s: float
    data_fraction: float


def accuracy(pred, truth) -> float:
    """Fraction of exact label matches."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise EmptyInput("accuracy over an empty label vector")
    return float((pred == truth).mean())


def mu_relative_error(est, truth) -> float:
    """Euclidean norm of the error relative to the truth's norm."""
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    denom = np.linalg.norm(truth)
    if denom == 0:
        raise ZeroTruthNorm("relative error against a zero mean")
    return float(np.linalg.norm(truth - est) / denom)


def cluster_matched_report(
    models: Sequence[ClusterModel],
    truth: Sequence[ClusterSpec],
    pred,
    truth_labels,
    train_time_s: float,
    predict_time_s: float,
    data_fraction: float = 1.0,
) -> EvalReport:
    """Average per-cluster estimation errors and assemble a report.

    Clusters are matched by label identity (supervised fits), so model i is
    compared against spec i directly.
    """
    if len(models) != len(truth):
        raise CountMismatch(f"{len(models)} models vs {len(truth)} true clusters")
    mu_errs = [mu_relative_error(mod.mu, spec.mu) for mod, spec in zip(models, truth)]
    riem = [
        spd_geodesic_distance(spec.sigma, mod.sigma) for mod, spec in zip(models, truth)
    ]
    riem_sm = [
        spd_geodesic_distance_scale_matched(spec.sigma, mod.sigma)
        for mod, spec in zip(models, truth)
    ]
    return EvalReport(
        accuracy=accuracy(pred, truth_labels),
        mu_rmse_pct=100.0 * float(np.mean(mu_errs)),
        sigma_riem=float(np.mean(riem)),
        sigma_riem_scale_matched=float(np.mean(riem_sm)),
        train_time_s=train_time_s,
        predict_time_s=predict_time_s,
        data_fraction=data_fraction,
    )
