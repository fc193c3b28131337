"""Dense symmetric-positive-definite primitives.

Every estimator and metric in the package funnels through this module: SPD
matrices are carried together with their cached lower Cholesky factor and
log-determinant, and all quadratic forms are evaluated by triangular solves
against that factor (no explicit inverses, no matrix square roots).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite

__all__ = [
    "SpdMatrix",
    "cholesky",
    "mahalanobis_sq",
    "mahalanobis_sq_many",
    "spd_geodesic_distance",
    "spd_geodesic_distance_scale_matched",
]

# Relative asymmetry tolerated on construction; larger asymmetry is an error,
# smaller is silently symmetrized (fixed-point loops accumulate rounding).
_SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class SpdMatrix:
    """An SPD matrix with cached Cholesky factor and log-determinant.

    Instances are immutable; build them with :func:`cholesky`.
    """

    matrix: np.ndarray
    chol: np.ndarray = field(repr=False)
    logdet: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def cholesky(a) -> SpdMatrix:
    """Validate, symmetrize and factor a square matrix into an :class:`SpdMatrix`.

    Parameters
    ----------
    a : array_like, shape (m, m)
        Symmetric positive-definite matrix. Asymmetry beyond 1e-12 relative
        is rejected; anything smaller is averaged away.

    Raises
    ------
    NotPositiveDefinite
        If the matrix is not square, too asymmetric, or has a non-positive
        Cholesky pivot (degenerate scatter needing regularization).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotPositiveDefinite(f"expected a square matrix, got shape {a.shape}")
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a - a.T).max() > _SYMMETRY_RTOL * max(scale, 1.0):
        raise NotPositiveDefinite("matrix is not symmetric")
    sym = (a + a.T) / 2.0
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    diag = np.diag(chol)
    if not np.all(diag > 0) or not np.all(np.isfinite(chol)):
        raise NotPositiveDefinite("non-positive Cholesky pivot")
    logdet = 2.0 * float(np.log(diag).sum())
    return SpdMatrix(matrix=sym, chol=chol, logdet=logdet)


def _check_dim(sigma: SpdMatrix, *vectors) -> None:
    for v in vectors:
        if v.shape[-1] != sigma.dim:
            raise DimensionMismatch(
                f"vector of dimension {v.shape[-1]} vs matrix of dimension {sigma.dim}"
            )


def mahalanobis_sq(x, mu, sigma: SpdMatrix) -> float:
    """Squared Mahalanobis distance (x-mu)' Sigma^{-1} (x-mu).

    Evaluated as the squared norm of the forward triangular solve against the
    cached Cholesky factor, so it is nonnegative by construction.
    """
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if x.shape != mu.shape:
        raise DimensionMismatch(f"x has shape {x.shape}, mu has shape {mu.shape}")
    _check_dim(sigma, x)
    y = solve_triangular(sigma.chol, x - mu, lower=True, check_finite=False)
    return float(y @ y)


def mahalanobis_sq_many(X, mu, sigma: SpdMatrix) -> np.ndarray:
    """Row-wise squared Mahalanobis distances of an (n, m) matrix."""
    X = np.asarray(X, dtype=float)
    mu = np.asarray(mu, dtype=float)
    _check_dim(sigma, X, mu)
    y = solve_triangular(sigma.chol, (X - mu).T, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", y, y)


def _gen_eigvals(a: SpdMatrix, b: SpdMatrix) -> np.ndarray:
    """Generalized eigenvalues of (b, a) as eigenvalues of La^-1 b La^-T."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions {a.dim} and {b.dim} differ")
    half = solve_triangular(a.chol, b.matrix, lower=True, check_finite=False)
    middle = solve_triangular(a.chol, half.T, lower=True, check_finite=False)
    ev = np.linalg.eigvalsh((middle + middle.T) / 2.0)
    if np.any(ev <= 0):
        raise NotPositiveDefinite("generalized eigenvalues are not all positive")
    return ev


def spd_geodesic_distance(a: SpdMatrix, b: SpdMatrix) -> float:
    """Affine-invariant Riemannian distance sqrt(sum_i log^2 lambda_i(a, b))."""
    return float(np.sqrt((np.log(_gen_eigvals(a, b)) ** 2).sum()))


def spd_geodesic_distance_scale_matched(a: SpdMatrix, b: SpdMatrix) -> float:
    """Geodesic distance minimized over positive rescalings of ``b``.

    Equals sqrt(sum_i (log lambda_i - mean log lambda)^2), so it is invariant
    under b -> c*b for any c > 0. Useful for scatter estimators that are only
    defined up to scale.
    """
    logs = np.log(_gen_eigvals(a, b))
    logs -= logs.mean()
    return float(np.sqrt((logs**2).sum()))
