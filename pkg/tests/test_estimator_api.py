import numpy as np
import pytest
from sklearn.base import clone

import spinlets as sp
from spinlets.harmonics import evaluate_scattered
from spinlets import NeedletThresholdRegressor


@pytest.fixture(scope="module")
def truth():
    params = sp.BesovParams(r=2.0, pi=2.0, q=2.0, radius=5.0)
    return sp.sample_besov_section(params, 2, 8, seed=21)


def _xy(truth, n, sigma, seed):
    data = sp.simulate_dataset(truth, n, sp.NoiseModel("gaussian", sigma), seed=seed)
    X = np.column_stack([data.theta, data.phi])
    return X, data.y


def test_get_set_params_and_clone():
    est = NeedletThresholdRegressor(bandwidth=2.0, spin=2, flavor="mixed", kappa=1.5)
    params = est.get_params()
    assert params["kappa"] == 1.5 and params["spin"] == 2
    est2 = clone(est).set_params(kappa=0.5)
    assert est2.get_params()["kappa"] == 0.5
    assert est.get_params()["kappa"] == 1.5


def test_fit_predict_recovers_clean_signal(truth):
    X, y = _xy(truth, 4000, 0.0, seed=2)
    est = NeedletThresholdRegressor(bandwidth=2.0, spin=2, flavor="mixed", kappa=0.75)
    assert est.fit(X, y) is est
    rng = np.random.default_rng(3)
    Xq = np.column_stack([rng.uniform(0.2, np.pi - 0.2, 300),
                          rng.uniform(-np.pi, np.pi, 300)])
    pred = est.predict(Xq)
    ref = evaluate_scattered(truth.harmonic_coeffs, Xq[:, 0], Xq[:, 1])
    rel = np.sqrt(np.sum(np.abs(pred - ref) ** 2) / np.sum(np.abs(ref) ** 2))
    assert rel < 0.35  # n = 4000 design noise only
    assert est.result_.kept_total > 0
    assert est.config_.j_cutoff == est.frame_.j_max


def test_predict_before_fit_raises(truth):
    est = NeedletThresholdRegressor()
    with pytest.raises(Exception):
        est.predict(np.array([[1.0, 0.0]]))


def test_input_validation(truth):
    est = NeedletThresholdRegressor(spin=2)
    X, y = _xy(truth, 50, 0.1, seed=4)
    with pytest.raises(ValueError):
        est.fit(X[:, :1], y)
    with pytest.raises(ValueError):
        est.fit(X, y[:-1])
    bad = X.copy()
    bad[0, 0] = 0.0  # pole
    with pytest.raises(ValueError):
        est.fit(bad, y)


def test_j_max_override(truth):
    X, y = _xy(truth, 600, 0.1, seed=5)
    est = NeedletThresholdRegressor(spin=2, flavor="mixed", kappa=1.0, j_max=5)
    est.fit(X, y)
    assert est.frame_.j_max == 5
    # coefficients still stop at the sample-size cutoff
    assert max(est.result_.kept.levels) == est.config_.j_cutoff
