"""Scikit-learn style front end for the thresholding regressor."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .directions import check_direction_arrays
from .needlets import build_frame
from .regression import Dataset, EstimatorConfig, estimate_field, fit

__all__ = ["NeedletThresholdRegressor"]


class NeedletThresholdRegressor(BaseEstimator):
    """Nonparametric regression of a complex spin field on sphere directions.

    X is an (n, 2) array of (colatitude, longitude) pairs in radians and y a
    complex array of spin-valued observations.  fit() estimates needlet
    coefficients up to the sample-size driven cutoff level, hard-thresholds
    them at kappa sqrt(log n / n), and predict() synthesizes the surviving
    coefficients.

    Conforms to the sklearn estimator protocol (get_params / set_params /
    clone) but keeps complex targets, so the stock R^2 scorer does not apply.
    """

    def __init__(self, bandwidth=2.0, spin=0, flavor="mixed", kappa=1.0,
                 j_max=None, window_smoothness=1.0):
        self.bandwidth = bandwidth
        self.spin = spin
        self.flavor = flavor
        self.kappa = kappa
        self.j_max = j_max
        self.window_smoothness = window_smoothness

    def _validate_X(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise ValueError("X must be an (n, 2) array of (theta, phi) angles")
        return check_direction_arrays(X[:, 0], X[:, 1])

    def fit(self, X, y):
        theta, phi = self._validate_X(X)
        y = np.asarray(y, dtype=complex).ravel()
        if y.shape != theta.shape:
            raise ValueError("y must have one observation per direction")
        data = Dataset(theta, phi, y, spin=int(self.spin))
        config = EstimatorConfig(
            bandwidth=float(self.bandwidth), spin=int(self.spin),
            flavor=self.flavor, kappa=float(self.kappa), n=data.n,
        )
        j_top = config.j_cutoff if self.j_max is None else int(self.j_max)
        j_top = max(j_top, config.j_cutoff)
        self.frame_ = build_frame(float(self.bandwidth), int(self.spin),
                                  self.flavor, j_top, float(self.window_smoothness))
        self.result_ = fit(data, config, self.frame_)
        self.coefficients_ = self.result_.kept
        self.config_ = config
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        theta, phi = self._validate_X(X)
        return estimate_field(self.result_, self.frame_, (theta, phi))
