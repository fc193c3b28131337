"""Pure-numpy implementations of the hot kernels.

Same contracts as the compiled ``femda._kernels`` extension; selected by
``femda._backend`` when the extension is unavailable or disabled. All inputs
are float64 arrays; ``L`` is the lower Cholesky factor of the current scatter.
"""

import numpy as np
from scipy.linalg import solve_triangular


def maha_sq_chol(X, mu, L):
    """Row-wise squared Mahalanobis distances ||L^{-1}(x_i - mu)||^2."""
    y = solve_triangular(L, (X - mu).T, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", y, y)


def fp_step(X, mu, L, mode, cap):
    """One weighted-moment pass for the capped fixed-point estimators.

    mode 0: location and scatter weights are both min(cap, 1/d).
    mode 1: location weights min(cap, 1/sqrt(d)), scatter weights min(cap, 1/d).

    Returns (wsum, wx, S): location-weight total, location-weighted coordinate
    sums, and the scatter-weighted outer-product sum about ``mu``.
    """
    d = maha_sq_chol(X, mu, L)
    ws = np.minimum(cap, 1.0 / d)
    wl = np.minimum(cap, 1.0 / np.sqrt(d)) if mode == 1 else ws
    xc = X - mu
    S = xc.T @ (xc * ws[:, None])
    return float(wl.sum()), wl @ X, S


def tqda_moments(X, mu, d, nu):
    """Weighted moments with Student weights w_i = 1/(nu + d_i)."""
    w = 1.0 / (nu + d)
    xc = X - mu
    S = xc.T @ (xc * w[:, None])
    return float(w.sum()), w @ X, S


def sum_log1p_div(d, nu):
    """sum_i log(1 + d_i / nu), the data term of the Student nu objective."""
    return float(np.log1p(d / nu).sum())
