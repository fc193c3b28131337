"""Seeded synthetic elliptical mixtures and feature contamination.

One generator stream drives a whole draw, in a fixed documented order: the k
cluster means, then the k scatter matrices, then the n cluster labels, then
the per-cluster samples (in cluster order), then the final row shuffle.
Contamination consumes its own caller-supplied stream. This makes every
dataset a pure function of (config, seed).
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .spd import SpdMatrix, cholesky

__all__ = [
    "GeneralizedGaussian",
    "StudentT",
    "ClusterSpec",
    "SyntheticConfig",
    "random_mean_on_sphere",
    "random_spd",
    "sample_cluster",
    "generate_mixture",
    "contaminate",
]


@dataclass(frozen=True)
class GeneralizedGaussian:
    """Elliptical family with radial law R^(2*beta) ~ Gamma(m/(2*beta), 2).

    beta = 1 is exactly Gaussian; beta < 1 has heavier tails, beta > 1
    lighter. The scatter matrix is the ellipsoid shape, not the covariance:
    the covariance equals E[R^2]/m times the scatter.
    """

    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class StudentT:
    """Multivariate Student family; nu > 2 keeps the covariance finite."""

    nu: float

    def __post_init__(self):
        if not self.nu > 2:
            raise ValueError("nu must exceed 2 (finite covariance)")


Family = Union[GeneralizedGaussian, StudentT]


@dataclass(frozen=True)
class ClusterSpec:
    """Ground-truth description of one mixture component."""

    prior: float
    family: Family
    mu: np.ndarray
    sigma: SpdMatrix

    def __post_init__(self):
        if not 0 <= self.prior <= 1:
            raise ValueError("prior must lie in [0, 1]")


_DEFAULT_FAMILIES = (GeneralizedGaussian(0.8), GeneralizedGaussian(1.5), StudentT(10.0))
_DEFAULT_PRIORS = (0.33, 0.33, 0.34)


@dataclass(frozen=True)
class SyntheticConfig:
    """Global knobs of the synthetic mixture generator."""

    k: int = 3
    m: int = 10
    n: int = 3000
    radius: float = 2.0
    xi: float = 1.0
    lambda_min: float = 1.0
    lambda_max: float = 20.0
    seed: int = 0
    cluster_families: Optional[Sequence[Family]] = None
    priors: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.k < 1 or self.n < self.k or self.m < 1:
            raise ValueError("need k >= 1, m >= 1 and n >= k")
        if not 0 < self.lambda_min <= self.lambda_max:
            raise ValueError("need 0 < lambda_min <= lambda_max")
        if self.cluster_families is None:
            if self.k != len(_DEFAULT_FAMILIES):
                raise ValueError("cluster_families required when k != 3")
            object.__setattr__(self, "cluster_families", _DEFAULT_FAMILIES)
        if self.priors is None:
            if self.k == len(_DEFAULT_PRIORS):
                object.__setattr__(self, "priors", _DEFAULT_PRIORS)
            else:
                object.__setattr__(self, "priors", tuple([1.0 / self.k] * self.k))
        if len(self.cluster_families) != self.k or len(self.priors) != self.k:
            raise ValueError("cluster_families and priors must have k entries")
        if abs(sum(self.priors) - 1.0) > 1e-12:
            raise ValueError("priors must sum to 1")


def random_mean_on_sphere(m: int, r: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw on the radius-r sphere: normalized Gaussian vector."""
    if m < 1 or r <= 0:
        raise ValueError("need m >= 1 and r > 0")
    z = rng.standard_normal(m)
    return r * (z / np.linalg.norm(z))


def random_spd(
    m: int,
    xi: float,
    lambda_min: float,
    lambda_max: float,
    rng: np.random.Generator,
) -> SpdMatrix:
    """Random scatter: Haar rotation of clamped chi-square eigenvalues.

    Each eigenvalue is chi-square with a Poisson(xi)-drawn degree of freedom,
    clamped to [lambda_min, lambda_max]; a Poisson draw of zero degrees of
    freedom is the zero point mass and clamps to lambda_min. The rotation is
    the QR orthogonal factor of a Gaussian matrix with the R-diagonal sign
    correction, which makes it Haar-distributed.
    """
    if lambda_min <= 0:
        raise ValueError("lambda_min must be positive")
    dof = rng.poisson(xi, size=m)
    lam = np.array([rng.chisquare(d) if d > 0 else 0.0 for d in dof])
    lam = np.clip(lam, lambda_min, lambda_max)
    z = rng.standard_normal((m, m))
    q, r = np.linalg.qr(z)
    q = q * np.sign(np.diag(r))
    return cholesky((q * lam) @ q.T)


def sample_cluster(spec: ClusterSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. rows from one component.

    Student: x = mu + L z sqrt(nu/g) with z standard normal, g ~ chi2_nu.
    Generalized Gaussian: x = mu + R L u with u uniform on the unit sphere
    and R = G^(1/(2*beta)), G ~ Gamma(m/(2*beta), scale 2).
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    m = spec.mu.shape[0]
    L = spec.sigma.chol
    if count == 0:
        return np.empty((0, m))
    z = rng.standard_normal((count, m))
    if isinstance(spec.family, StudentT):
        nu = spec.family.nu
        g = rng.chisquare(nu, size=count)
        return spec.mu + (z * np.sqrt(nu / g)[:, None]) @ L.T
    beta = spec.family.beta
    u = z / np.linalg.norm(z, axis=1, keepdims=True)
    g = rng.gamma(shape=m / (2 * beta), scale=2.0, size=count)
    radius = g ** (1.0 / (2 * beta))
    return spec.mu + (u * radius[:, None]) @ L.T


def generate_mixture(
    cfg: SyntheticConfig,
) -> Tuple[np.ndarray, np.ndarray, List[ClusterSpec]]:
    """Draw a labelled mixture and return it with its ground-truth specs."""
    rng = np.random.default_rng(cfg.seed)
    mus = [random_mean_on_sphere(cfg.m, cfg.radius, rng) for _ in range(cfg.k)]
    sigmas = [
        random_spd(cfg.m, cfg.xi, cfg.lambda_min, cfg.lambda_max, rng)
        for _ in range(cfg.k)
    ]
    specs = [
        ClusterSpec(prior=p, family=f, mu=mu, sigma=sigma)
        for p, f, mu, sigma in zip(cfg.priors, cfg.cluster_families, mus, sigmas)
    ]
    labels = rng.choice(cfg.k, size=cfg.n, p=np.asarray(cfg.priors, dtype=float))
    X = np.empty((cfg.n, cfg.m))
    for j, spec in enumerate(specs):
        idx = np.flatnonzero(labels == j)
        X[idx] = sample_cluster(spec, idx.size, rng)
    perm = rng.permutation(cfg.n)
    return X[perm], labels[perm], specs


def contaminate(
    data: np.ndarray,
    labels: np.ndarray,
    fraction: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Replace a uniformly chosen row subset by bounding-box uniform noise.

    floor(fraction * n) rows are redrawn coordinate-wise uniformly on the
    per-coordinate [min, max] of the ORIGINAL data, so no replacement leaves
    the original bounding hypercube. Labels are deliberately untouched (the
    noise keeps its row's label); the labels argument documents that the
    operation is feature-only.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    X = np.asarray(data, dtype=float)
    out = X.copy()
    n_replace = math.floor(fraction * len(X))
    if n_replace == 0:
        return out
    rows = rng.choice(len(X), size=n_replace, replace=False)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    out[rows] = rng.uniform(lo, hi, size=(n_replace, X.shape[1]))
    return out
