"""Ordinary least squares with the usual diagnostics.

Coefficients come from a thin QR factorisation of the design matrix;
standard errors use ``sigma^2 (X'X)^{-1} = sigma^2 R^{-1} R^{-T}`` with
``sigma^2 = RSS / (n - k)``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import ParameterError, RankDeficientError
from .io import write_json

RANK_TOL = 1e-10


@dataclass
class OlsFit:
    names: list
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    r_squared_centered: float
    r_squared_uncentered: float
    n_observations: int
    includes_intercept: bool
    residuals: np.ndarray
    rss: float

    @property
    def params(self):
        return dict(zip(self.names, self.coefficients))

    @property
    def df_resid(self):
        return self.n_observations - len(self.names)

    def summary(self, title=None):
        """Aligned text table: coefficient, standard error and t per regressor."""
        kind = "with constant" if self.includes_intercept else "no constant"
        lines = [title or f"OLS regression ({kind})"]
        lines.append(f"{'observations:':<24}{self.n_observations:>12d}")
        lines.append(f"{'R-squared (uncentered):':<24}{self.r_squared_uncentered:>12.4f}")
        lines.append(f"{'R-squared (centered):':<24}{self.r_squared_centered:>12.4f}")
        width = max(10, *(len(n) for n in self.names))
        lines.append("-" * (width + 39))
        lines.append(f"{'':<{width}} {'coef':>12} {'std err':>12} {'t':>12}")
        for n, b, s, t in zip(self.names, self.coefficients, self.std_errors, self.t_stats):
            lines.append(f"{n:<{width}} {b:>12.4f} {s:>12.4f} {t:>12.3f}")
        lines.append("-" * (width + 39))
        return "\n".join(lines)

    def to_dict(self):
        return {
            "names": list(self.names),
            "coefficients": self.coefficients,
            "std_errors": self.std_errors,
            "t_stats": self.t_stats,
            "r_squared_centered": self.r_squared_centered,
            "r_squared_uncentered": self.r_squared_uncentered,
            "n_observations": self.n_observations,
            "includes_intercept": self.includes_intercept,
        }

    def write_json(self, path):
        write_json(path, self.to_dict())


def _collinear_columns(X, names):
    """Names of the columns involved in a (numerical) linear dependence."""
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0):
        return [names[j] for j in np.flatnonzero(norms == 0)]
    _, s, vt = np.linalg.svd(X / norms, full_matrices=False)
    null = vt[s <= RANK_TOL * s[0] * max(X.shape)]
    if null.size == 0:
        return []
    involved = np.any(np.abs(null) > 1e-8, axis=0)
    return [names[j] for j in np.flatnonzero(involved)]


def ols(X, y, intercept=False, names=None):
    """Least-squares fit of ``y`` on the columns of ``X``.

    With ``intercept=True`` a constant column named ``const`` is prepended.
    Raises :class:`RankDeficientError` (listing the offending columns) when the
    design is numerically rank deficient, and :class:`ParameterError` when
    there are not more rows than regressors.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
    n, k0 = X.shape
    names = list(names) if names is not None else [f"x{j + 1}" for j in range(k0)]
    if len(names) != k0:
        raise ParameterError(f"{len(names)} names for {k0} columns")
    if intercept:
        X = np.column_stack([np.ones(n), X])
        names = ["const"] + names
    k = X.shape[1]
    if n <= k:
        raise ParameterError(f"need more observations ({n}) than regressors ({k})")
    bad = _collinear_columns(X, names)
    if bad:
        raise RankDeficientError(f"design matrix is rank deficient; collinear columns: {bad}", bad)
    q, r = scipy.linalg.qr(X, mode="economic")
    beta = scipy.linalg.solve_triangular(r, q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / (n - k)
    rinv = scipy.linalg.solve_triangular(r, np.eye(k))
    se = np.sqrt(sigma2 * np.sum(rinv**2, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = beta / se
    tss_u = float(y @ y)
    dev = y - y.mean()
    tss_c = float(dev @ dev)
    r2_u = 1.0 - rss / tss_u if tss_u > 0 else 0.0
    r2_c = 1.0 - rss / tss_c if tss_c > 0 else 0.0
    return OlsFit(names, beta, se, t, r2_c, r2_u, n, bool(intercept), resid, rss)


class OLSRegression(BaseEstimator, RegressorMixin):
    """Estimator wrapper around :func:`ols`.

    ``score`` returns the centered R-squared like other sklearn regressors;
    the fitted :class:`OlsFit` is kept on ``fit_`` for the other diagnostics.
    """

    def __init__(self, fit_intercept=False):
        self.fit_intercept = fit_intercept

    def fit(self, X, y):
        res = ols(X, y, intercept=self.fit_intercept)
        self.fit_ = res
        if self.fit_intercept:
            self.intercept_ = float(res.coefficients[0])
            self.coef_ = res.coefficients[1:]
        else:
            self.intercept_ = 0.0
            self.coef_ = res.coefficients
        self.n_features_in_ = self.coef_.size
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(np.asarray(X, dtype=float).reshape(len(X), -1))
        return X @ self.coef_ + self.intercept_
