"""Pure-NumPy reference implementations of the hot kernels.

Used whenever the compiled extension is unavailable or when the
``OCCUPATH_BACKEND=python`` override is set.  The compiled module in
``_core.pyx`` implements the same signatures; both operate on float64
C-contiguous arrays prepared by the dispatch wrappers in ``__init__``.
"""

import numpy as np
from scipy.special import expit


def time_features(omega, phase, ts, order):
    """Cosine features of a scalar argument, or their t-derivatives.

    Parameters
    ----------
    omega : (M,) frequencies
    phase : (M,) phase offsets
    ts : (N,) evaluation points
    order : 0, 1 or 2

    Returns
    -------
    (N, M) array; row i holds sqrt(2/M)*cos(omega*ts[i] + phase) for
    order 0 and its first/second derivative for orders 1/2.
    """
    m = omega.shape[0]
    scale = np.sqrt(2.0 / m)
    arg = np.outer(ts, omega) + phase
    if order == 0:
        return scale * np.cos(arg)
    if order == 1:
        return -scale * np.sin(arg) * omega
    # order == 2
    return -scale * np.cos(arg) * (omega * omega)


def spatial_design(omega, phase, points):
    """Feature design matrix for spatial cosine features.

    omega is (M, D), points is (N, D); returns (N, M).
    """
    m = omega.shape[0]
    scale = np.sqrt(2.0 / m)
    return scale * np.cos(points @ omega.T + phase)


def map_query(omega, phase, weights, bias, points):
    """Occupancy probabilities sigmoid(Phi(x) @ w + bias) for each row of points."""
    f = spatial_design(omega, phase, points) @ weights + bias
    return expit(f)


def map_query_grad(omega, phase, weights, bias, points):
    """Occupancy probabilities and their spatial gradients.

    Returns (p, grad) with p of shape (N,) and grad of shape (N, D),
    grad = p*(1-p) * d/dx (Phi(x) @ w).
    """
    m = omega.shape[0]
    scale = np.sqrt(2.0 / m)
    arg = points @ omega.T + phase
    f = scale * (np.cos(arg) @ weights) + bias
    p = expit(f)
    df = -scale * ((np.sin(arg) * weights) @ omega)
    grad = (p * (1.0 - p))[:, None] * df
    return p, grad


def rank1_updates(weights, grads, feats, eta):
    """In-place accumulation W -= eta * sum_i outer(grads[i], feats[i]).

    weights is (D, M), grads is (B, D), feats is (B, M).
    """
    weights -= eta * (grads.T @ feats)
