"""Input validation helpers shared by the estimators."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import ExistenceError, ParameterError

ROW_SUM_TOL = 1e-12


def check_weights(g, row_sums=1.0, tol=ROW_SUM_TOL, allow_empty_rows=False):
    """Return ``g`` as a float ndarray after checking the network invariants.

    Enforces a square, finite, non-negative matrix with zero diagonal whose
    rows sum to ``row_sums`` (a scalar or per-row vector) within ``tol``.
    """
    g = check_array(g, dtype=np.float64, ensure_2d=True, ensure_min_samples=1,
                    ensure_min_features=1)
    n, k = g.shape
    if n != k:
        raise ParameterError(f"weight matrix must be square, got {g.shape}")
    if np.any(g < 0):
        raise ParameterError("weights must be non-negative")
    if np.any(np.diag(g) != 0):
        raise ParameterError("self-comparison weights (diagonal) must be zero")
    target = np.broadcast_to(np.asarray(row_sums, dtype=float), (n,))
    sums = g.sum(axis=1)
    bad = np.abs(sums - target) > tol * np.maximum(1.0, np.abs(target))
    if allow_empty_rows:
        bad &= sums != 0
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ParameterError(f"row {i} sums to {sums[i]!r}, expected {target[i]!r}")
    return g


def check_alpha(alpha, n=None, upper=1.0):
    """Reference strengths as a 1-d float array with ``0 <= alpha_i < upper``."""
    alpha = check_array(np.atleast_1d(np.asarray(alpha, dtype=float)), ensure_2d=False,
                        dtype=np.float64)
    if alpha.ndim != 1:
        alpha = alpha.ravel()
    if n is not None and alpha.shape[0] != n:
        raise ParameterError(f"expected {n} reference strengths, got {alpha.shape[0]}")
    if np.any(alpha < 0):
        raise ParameterError("reference strengths must be non-negative")
    if np.any(alpha >= upper):
        i = int(np.flatnonzero(alpha >= upper)[0])
        raise ExistenceError(
            f"reference strength alpha[{i}] = {alpha[i]!r} violates alpha_i < {upper}"
        )
    return alpha


def check_positive(value, name):
    value = float(value)
    if not value > 0 or not np.isfinite(value):
        raise ParameterError(f"{name} must be positive and finite, got {value!r}")
    return value


def check_probability_vector(p, tol=1e-10):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ParameterError("probabilities must be a non-empty vector")
    if np.any(p < 0) or abs(p.sum() - 1.0) > tol:
        raise ParameterError(f"probabilities must be non-negative and sum to 1 (sum={p.sum()!r})")
    return p
