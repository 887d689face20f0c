"""scikit-learn style wrappers around the norm estimators.

The underlying computations have no training step, so ``fit`` only validates
hyperparameters and resolves the potential. The wrappers make the estimates
usable inside pipelines and grid searches.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .potential import parse_potential
from .resolvent import estimate_resolvent
from .semigroup import semigroup_norm

__all__ = ["ResolventNormEstimator", "SemigroupNormEstimator", "WeylExponentRegressor"]


def _single_column(X) -> np.ndarray:
    X = check_array(X, ensure_2d=True, dtype=float)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single feature column, got {X.shape[1]}")
    return X[:, 0]


class ResolventNormEstimator(TransformerMixin, BaseEstimator):
    """Map a column of lambda values to the four log-norm estimates.

    Output columns are ``log_asymptotic``, ``log_numeric`` (NaN past the
    overflow guard), ``log_schur_upper`` and ``log_witness_lower``.

    Args:
        potential: Potential spec string, e.g. ``"pow:2"``.
        points_per_rho: Grid resolution of the kernel discretization.
        schur_grid_n: Sample count for the Schur supremum.
        seed: Seed of the power-iteration start vector.
    """

    def __init__(self, potential="pow:2", points_per_rho=20, schur_grid_n=2000, seed=0):
        self.potential = potential
        self.points_per_rho = points_per_rho
        self.schur_grid_n = schur_grid_n
        self.seed = seed

    def fit(self, X=None, y=None):
        if self.points_per_rho < 10:
            raise ValueError(f"points_per_rho must be >= 10, got {self.points_per_rho}")
        self.potential_ = parse_potential(self.potential)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "potential_")
        lams = _single_column(X)
        out = np.empty((lams.size, 4))
        for i, lam in enumerate(lams):
            est = estimate_resolvent(
                self.potential_,
                lam,
                points_per_rho=self.points_per_rho,
                schur_grid_n=self.schur_grid_n,
                seed=self.seed,
            )
            numeric = np.nan if est.log_numeric is None else est.log_numeric
            out[i] = (est.log_asymptotic, numeric, est.log_schur_upper, est.log_witness_lower)
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(["log_asymptotic", "log_numeric", "log_schur_upper", "log_witness_lower"], dtype=object)


class SemigroupNormEstimator(TransformerMixin, BaseEstimator):
    """Map a column of times ``t`` to ``log ||S_t||``."""

    def __init__(self, potential="pow:2"):
        self.potential = potential

    def fit(self, X=None, y=None):
        self.potential_ = parse_potential(self.potential)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "potential_")
        ts = _single_column(X)
        return np.array([[semigroup_norm(self.potential_, t)] for t in ts])


class WeylExponentRegressor(RegressorMixin, BaseEstimator):
    """Power law ``mu = C k^s`` fitted by least squares in log-log coordinates.

    Args:
        tail_fraction: Fraction of the largest ``k`` used in the fit; the
            default keeps ``k >= k_max / 4``.
    """

    def __init__(self, tail_fraction=0.75):
        self.tail_fraction = tail_fraction

    def fit(self, X, y):
        if not 0 < self.tail_fraction <= 1:
            raise ValueError(f"tail_fraction must lie in (0, 1], got {self.tail_fraction!r}")
        k = _single_column(X)
        y = check_array(np.asarray(y, dtype=float).reshape(-1, 1))[:, 0]
        if y.size != k.size:
            raise ValueError(f"X has {k.size} rows but y has {y.size}")
        if np.any(k <= 0) or np.any(y <= 0):
            raise ValueError("power-law fit needs positive k and mu")
        sel = k >= (1.0 - self.tail_fraction) * k.max()
        if sel.sum() < 2:
            raise ValueError("fewer than two points in the fitted tail")
        self.coef_, self.intercept_ = np.polyfit(np.log(k[sel]), np.log(y[sel]), 1)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        k = _single_column(X)
        return np.exp(self.intercept_ + self.coef_ * np.log(k))
