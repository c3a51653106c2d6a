"""scikit-learn style wrapper around affine fractal interpolation."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .attractor import evaluate_many
from .continuation import continue_many, parse_address
from .ifs import ifs_from_data


class FractalInterpolator(RegressorMixin, BaseEstimator):
    """Fractal interpolation through the training points.

    ``vertical_scaling`` is one factor for every branch or one per branch.
    With ``address`` set (e.g. ``"(1)"`` or ``"21(2)"``), ``predict`` also
    answers outside the data range by fractal continuation along it.
    """

    def __init__(self, vertical_scaling=0.3, depth=40, address=None, depth_cap=64):
        self.vertical_scaling = vertical_scaling
        self.depth = depth
        self.address = address
        self.depth_cap = depth_cap

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=2, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single feature, got {X.shape[1]}")
        x = X[:, 0]
        order = np.argsort(x, kind="stable")
        x, y = x[order], y[order]
        d = np.broadcast_to(np.asarray(self.vertical_scaling, dtype=float), (len(x) - 1,))
        self.ifs_ = ifs_from_data(list(zip(x, y)), d)
        self.theta_ = parse_address(self.address, self.ifs_.N) if self.address else None
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "ifs_")
        X = check_array(X)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single feature, got {X.shape[1]}")
        x = X[:, 0]
        if self.theta_ is None:
            return evaluate_many(self.ifs_, x, self.depth)[0]
        return continue_many(self.ifs_, self.theta_, x, self.depth_cap, self.depth)[0]

    def error_bound(self, X):
        """Certified ``|prediction - f(x)|`` for each row."""
        check_is_fitted(self, "ifs_")
        x = check_array(X)[:, 0]
        if self.theta_ is None:
            return evaluate_many(self.ifs_, x, self.depth)[1]
        return continue_many(self.ifs_, self.theta_, x, self.depth_cap, self.depth)[2]
