"""scikit-learn style wrapper around the gamma-ratio region classifier."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .classifier import RegionLabel, classify_region, gamma_ratio_pattern
from .errors import DomainError


class RegionClassifier(ClassifierMixin, BaseEstimator):
    """Label rows ``(a, b, c, d)`` with their region D1..D7.

    The decision is exact, so ``fit`` only validates input and records the
    label set. ``predict_pattern`` and ``turning_points`` report the shape of
    ``Gamma(ct + d)/Gamma(at + b)`` for each row.
    """

    def _validate(self, X, reset):
        X = check_array(X, dtype=float, ensure_all_finite=True)
        if X.shape[1] != 4:
            raise ValueError(f"expected 4 columns (a, b, c, d), got {X.shape[1]}")
        if np.any(X <= 0):
            raise DomainError("a, b, c, d must be positive")
        if reset:
            self.n_features_in_ = 4
        return X

    def fit(self, X, y=None):
        self._validate(X, reset=True)
        self.classes_ = np.array([r.value for r in RegionLabel])
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = self._validate(X, reset=False)
        return np.array([classify_region(*row).value for row in X])

    def predict_pattern(self, X):
        check_is_fitted(self, "classes_")
        X = self._validate(X, reset=False)
        return np.array([gamma_ratio_pattern(*row).pattern.value for row in X])

    def turning_points(self, X):
        """Turning point of each row's gamma ratio, ``nan`` where it is monotone."""
        check_is_fitted(self, "classes_")
        X = self._validate(X, reset=False)
        out = np.full(len(X), np.nan)
        for i, row in enumerate(X):
            v = gamma_ratio_pattern(*row)
            if v.turning_point is not None:
                out[i] = v.turning_point
        return out
