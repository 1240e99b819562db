"""scikit-learn estimators over the columns of a design matrix.

Columns of ``X`` play the role of dictionary atoms and ``y`` is the signal,
the same layout as :class:`sklearn.linear_model.OrthogonalMatchingPursuit`.
Columns are rescaled to unit norm internally and ``coef_`` is reported on
the original column scale, so ``predict(X) == X @ coef_``. No intercept is
fitted.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dictionary import build_dictionary
from .oga import run_oga
from .oracle import DEFAULT_BUDGET, best_m_term


def _column_dictionary(X):
    norms = np.linalg.norm(X, axis=0)
    return build_dictionary(X.T, "design-columns"), norms


class _ColumnModel(RegressorMixin, BaseEstimator):
    def _validate_fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        return X, y

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_


class OrthogonalGreedyRegressor(_ColumnModel):
    """OGA with a fixed step budget.

    Parameters
    ----------
    n_steps : int
        Number of greedy steps (at most ``min(n_samples, n_features)``).
    stop_tol : float or None
        Stop once the largest residual correlation is at most this value;
        None means ``1e-13 * ||y||``.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    selected_ : ndarray of int
        Column indices in selection order.
    n_iter_ : int
    trace_ : OgaTrace
        Full run record in the unit-norm column basis.
    """

    def __init__(self, n_steps=1, stop_tol=None):
        self.n_steps = n_steps
        self.stop_tol = stop_tol

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        d, norms = _column_dictionary(X)
        trace = run_oga(d, y, self.n_steps, self.stop_tol)
        coef = np.zeros(X.shape[1])
        if trace.n_steps:
            sel = trace.selected
            coef[sel] = trace.coeffs_per_step[-1] / norms[sel]
        self.coef_ = coef
        self.selected_ = trace.selected.copy()
        self.n_iter_ = trace.n_steps
        self.trace_ = trace
        return self


class BestMTermRegressor(_ColumnModel):
    """Least-squares fit on the best ``m`` columns, found by exhaustive search.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    support_ : tuple of int
        Lexicographically smallest optimal support.
    sigma_ : float
        Residual norm of the optimal fit.
    """

    def __init__(self, m=1, budget=DEFAULT_BUDGET):
        self.m = m
        self.budget = budget

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        d, norms = _column_dictionary(X)
        res = best_m_term(d, y, self.m, budget=self.budget)
        coef = np.zeros(X.shape[1])
        idx = list(res.support)
        coef[idx] = res.coeffs / norms[idx]
        self.coef_ = coef
        self.support_ = res.support
        self.sigma_ = res.sigma
        return self
