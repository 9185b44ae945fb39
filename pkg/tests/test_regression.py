import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import spinlets as sp
from spinlets.harmonics import evaluate_scattered, project_scattered
from spinlets.regression import empirical_harmonics

FOUR_PI = 4.0 * np.pi


def localized_truth(band_limit=4, spin=2, amplitude=2.0, center=(1.1, 0.4)):
    """Band-limited projection-kernel bump: sparse needlet coefficients."""
    x0 = sp.Direction(*center)
    table = project_scattered(np.array([x0.theta]), np.array([x0.phi]),
                              np.array([1.0 + 0j]), band_limit, spin)
    c = sp.HarmonicCoefficients(band_limit, spin)
    c.values[:] = amplitude * table.values
    c.values[: spin + 1] = 0.0
    params = sp.BesovParams(r=2.0, pi=2.0, q=2.0, radius=10.0)
    return sp.BesovTestSection(harmonic_coeffs=c, spin=spin, band_limit=band_limit,
                               params=params, seed=0, sup_norm=float("nan"))


@pytest.fixture(scope="module")
def smooth_truth():
    params = sp.BesovParams(r=2.0, pi=2.0, q=2.0, radius=1.0)
    return sp.sample_besov_section(params, 2, 8, seed=42)


# ------------------------------------------------------------- noise model

def test_noise_model_component_moments():
    rng = np.random.default_rng(0)
    for kind in ("gaussian", "bounded_uniform", "rademacher"):
        model = sp.NoiseModel(kind, 0.5)
        eps = model.sample(rng, 200_000)
        # E eps = 0 and components share the law
        assert abs(eps.mean()) < 5e-3
        assert abs(eps.real.var() - eps.imag.var()) < 5e-3
        # E |eps|^2 = sigma^2, and E comp^2 <= tau^2
        assert abs(np.mean(np.abs(eps) ** 2) - 0.25) < 5e-3
        assert eps.real.var() <= model.tau ** 2 + 1e-3


def test_noise_model_validation():
    with pytest.raises(ValueError):
        sp.NoiseModel("poisson", 0.5)
    with pytest.raises(ValueError):
        sp.NoiseModel("gaussian", -1.0)


# --------------------------------------------------------------- simulate

def test_noiseless_dataset_samples_truth(smooth_truth):
    data = sp.simulate_dataset(smooth_truth, 50, sp.NoiseModel("gaussian", 0.0), seed=1)
    f = evaluate_scattered(smooth_truth.harmonic_coeffs, data.theta, data.phi)
    assert np.abs(data.y - f).max() == 0.0
    assert data.truth_id == smooth_truth.truth_id


def test_dataset_deterministic(smooth_truth):
    noise = sp.NoiseModel("gaussian", 0.5)
    d1 = sp.simulate_dataset(smooth_truth, 100, noise, seed=9)
    d2 = sp.simulate_dataset(smooth_truth, 100, noise, seed=9)
    assert np.array_equal(d1.y, d2.y) and np.array_equal(d1.theta, d2.theta)


def test_uniform_design_mean_of_harmonic(smooth_truth):
    # E Y_10(X) = 0 under the uniform law, Var = 1/(4 pi)
    n = 100_000
    data = sp.simulate_dataset(smooth_truth, n, sp.NoiseModel("gaussian", 0.0), seed=2)
    vals = sp.ylm(1, 0, data.theta, data.phi)
    se = math.sqrt(1.0 / FOUR_PI / n)
    assert abs(vals.mean()) < 3 * se


def test_noise_second_moment_monte_carlo(smooth_truth):
    # E |eps|^2 = sigma^2 = 2 E comp^2
    n = 100_000
    sigma = 0.5
    data = sp.simulate_dataset(smooth_truth, n, sp.NoiseModel("gaussian", sigma), seed=3)
    f = evaluate_scattered(smooth_truth.harmonic_coeffs, data.theta, data.phi)
    eps = data.y - f
    m2 = np.mean(np.abs(eps) ** 2)
    se = np.std(np.abs(eps) ** 2) / math.sqrt(n)
    assert abs(m2 - sigma ** 2) < 3 * se


# ---------------------------------------------------------------- config

def test_threshold_scale_value():
    cfg = sp.EstimatorConfig(2.0, 0, "scalar", kappa=1.0, n=100)
    assert np.isclose(cfg.t_n, 0.21459660262893472)


def test_cutoff_level_arithmetic():
    cfg = sp.EstimatorConfig(2.0, 0, "scalar", kappa=1.0, n=1000)
    assert cfg.j_cutoff == 3  # 2^3 = 8 <= sqrt(1000/log 1000) ~ 12.03 < 16
    target = math.sqrt(1000 / math.log(1000))
    assert 2.0 ** cfg.j_cutoff <= target < 2.0 ** (cfg.j_cutoff + 1)


def test_config_validation():
    with pytest.raises(ValueError):
        sp.EstimatorConfig(1.0, 0, "scalar", kappa=1.0, n=100)
    with pytest.raises(ValueError):
        sp.EstimatorConfig(2.0, 0, "scalar", kappa=-1.0, n=100)
    with pytest.raises(ValueError):
        sp.EstimatorConfig(2.0, 0, "scalar", kappa=1.0, n=1)


# ----------------------------------------------------------- coefficients

def test_estimator_matches_direct_sum(smooth_truth, spin2_mixed_frame):
    data = sp.simulate_dataset(smooth_truth, 400, sp.NoiseModel("gaussian", 0.3), seed=4)
    raw = sp.estimate_coefficients(data, spin2_mixed_frame, 2)
    for (j, k) in [(0, 2), (1, 50), (2, 300)]:
        psi = sp.evaluate_needlet(spin2_mixed_frame, j, k, (data.theta, data.phi))
        direct = (FOUR_PI / data.n) * np.sum(data.y * np.conj(psi))
        assert abs(direct - raw.levels[j][k]) < 1e-13


def test_zero_observations_give_zero_coefficients(smooth_truth, spin2_mixed_frame):
    data = sp.simulate_dataset(smooth_truth, 50, sp.NoiseModel("gaussian", 0.0), seed=5)
    data.y[:] = 0.0
    raw = sp.estimate_coefficients(data, spin2_mixed_frame, 2)
    assert raw.energy() == 0.0


@pytest.mark.slow
def test_unbiasedness_and_variance_bound(smooth_truth, spin2_mixed_frame):
    frame = spin2_mixed_frame
    beta_true = sp.analyze(frame, smooth_truth.harmonic_coeffs)
    noise = sp.NoiseModel("gaussian", 0.5)
    n, reps = 1200, 160
    spots = [(1, 60), (2, 150), (2, 400), (3, 1200)]
    draws = {spot: [] for spot in spots}
    for r in range(reps):
        data = sp.simulate_dataset(smooth_truth, n, noise, seed=600 + r)
        raw = sp.estimate_coefficients(data, frame, 3)
        for (j, k) in spots:
            draws[(j, k)].append(raw.levels[j][k])
    M = smooth_truth.sup_norm
    for (j, k) in spots:
        arr = np.array(draws[(j, k)])
        se = arr.std(ddof=1) / math.sqrt(reps)
        bias = abs(arr.mean() - beta_true.levels[j][k])
        assert bias <= 3 * se, (j, k, bias / se)
        # inverse-density weighted estimator: variance bound carries the 4 pi
        tau_sq = sp.tau_l2_norm(frame, j, k) ** 2
        bound = FOUR_PI * (0.25 * tau_sq + M ** 2) / n
        mc_var = arr.var(ddof=1)
        mc_se = mc_var * math.sqrt(2.0 / (reps - 1))
        assert mc_var <= bound + 3 * mc_se, (j, k, mc_var / bound)


# ------------------------------------------------------------ thresholding

def test_threshold_extremes(smooth_truth, spin2_mixed_frame):
    data = sp.simulate_dataset(smooth_truth, 300, sp.NoiseModel("gaussian", 0.2), seed=6)
    raw = sp.estimate_coefficients(data, spin2_mixed_frame, 2)
    huge = sp.threshold_coefficients(raw, sp.EstimatorConfig(2.0, 2, "mixed", 1e9, 300))
    assert huge.energy() == 0.0
    ident = sp.threshold_coefficients(raw, sp.EstimatorConfig(2.0, 2, "mixed", 0.0, 300))
    for j in raw.levels:
        assert np.array_equal(ident.levels[j], raw.levels[j])


def test_threshold_arithmetic_example():
    # n = 100, kappa = 1: t_n ~ 0.21460; 0.3 kept, 0.2 killed
    cfg = sp.EstimatorConfig(2.0, 0, "scalar", kappa=1.0, n=100)
    raw = sp.NeedletCoefficients("B=2,s=0,flavor=scalar,j_max=0",
                                 {0: np.array([0.3 + 0j, 0.2 + 0j])})
    kept = sp.threshold_coefficients(raw, cfg)
    assert kept.levels[0][0] == 0.3 + 0j
    assert kept.levels[0][1] == 0.0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False,
                                   allow_infinity=False),
                min_size=1, max_size=40))
def test_threshold_idempotent(values):
    cfg = sp.EstimatorConfig(2.0, 0, "scalar", kappa=1.3, n=50)
    raw = sp.NeedletCoefficients("id", {0: np.array(values, dtype=complex)})
    once = sp.threshold_coefficients(raw, cfg)
    twice = sp.threshold_coefficients(once, cfg)
    assert np.array_equal(once.levels[0], twice.levels[0])


def test_phase_equivariance(smooth_truth, spin2_mixed_frame):
    data = sp.simulate_dataset(smooth_truth, 300, sp.NoiseModel("gaussian", 0.2), seed=7)
    cfg = sp.EstimatorConfig(2.0, 2, "mixed", kappa=1.0, n=300)
    raw = sp.estimate_coefficients(data, spin2_mixed_frame, cfg.j_cutoff)
    phase = np.exp(1j * 0.83)
    rotated = sp.Dataset(data.theta, data.phi, phase * data.y, spin=2)
    raw_rot = sp.estimate_coefficients(rotated, spin2_mixed_frame, cfg.j_cutoff)
    for j in raw.levels:
        assert np.abs(raw_rot.levels[j] - phase * raw.levels[j]).max() < 1e-12
    kept = sp.threshold_coefficients(raw, cfg)
    kept_rot = sp.threshold_coefficients(raw_rot, cfg)
    for j in kept.levels:
        assert np.array_equal(kept.levels[j] != 0, kept_rot.levels[j] != 0)


# ------------------------------------------------------------------- fit

@pytest.mark.slow
def test_noiseless_recovery_end_to_end():
    # localized truth, n = 1e5, small threshold: relative L2 loss < 0.05
    truth = localized_truth()
    n = 100_000
    data = sp.simulate_dataset(truth, n, sp.NoiseModel("gaussian", 0.0), seed=3)
    cfg = sp.EstimatorConfig(2.0, 2, "mixed", kappa=2.0, n=n)
    frame = sp.build_frame(2.0, 2, "mixed", cfg.j_cutoff)
    result = sp.fit_threshold_estimator(data, cfg, frame)
    loss2 = sp.lp_loss(result, truth, frame, 2)
    norm2 = sp.lp_loss(frame.empty_coefficients(), truth, frame, 2)
    assert math.sqrt(loss2 / norm2) < 0.05


def test_fit_huge_kappa_returns_zero_estimator(smooth_truth):
    n = 500
    data = sp.simulate_dataset(smooth_truth, n, sp.NoiseModel("gaussian", 0.3), seed=8)
    cfg = sp.EstimatorConfig(2.0, 2, "mixed", kappa=1e9, n=n)
    frame = sp.build_frame(2.0, 2, "mixed", cfg.j_cutoff)
    result = sp.fit_threshold_estimator(data, cfg, frame)
    assert result.kept_total == 0
    loss_p = sp.lp_loss(result, smooth_truth, frame, 2)
    norm_p = sp.lp_loss(frame.empty_coefficients(), smooth_truth, frame, 2)
    assert np.isclose(loss_p, norm_p, rtol=1e-12)
    # diagnostics get logged per level when the noise scale is known
    result2 = sp.fit_threshold_estimator(data, cfg, frame, noise_sigma=0.3)
    assert all("sigma_j_sq" in d for d in result2.diagnostics.values())


def test_fit_validates_sample_size(smooth_truth, spin2_mixed_frame):
    data = sp.simulate_dataset(smooth_truth, 100, sp.NoiseModel("gaussian", 0.1), seed=9)
    cfg = sp.EstimatorConfig(2.0, 2, "mixed", kappa=1.0, n=200)
    with pytest.raises(ValueError):
        sp.fit_threshold_estimator(data, cfg, spin2_mixed_frame)


# ------------------------------------------------------------------ losses

def test_loss_vanishes_on_exact_coefficients(smooth_truth, spin2_mixed_frame):
    beta = sp.analyze(spin2_mixed_frame, smooth_truth.harmonic_coeffs)
    loss = sp.lp_loss(beta, smooth_truth, spin2_mixed_frame, 2)
    assert loss < 1e-10


def test_zero_estimate_reproduces_truth_norm(smooth_truth, spin2_mixed_frame):
    loss = sp.lp_loss(spin2_mixed_frame.empty_coefficients(), smooth_truth,
                      spin2_mixed_frame, 2)
    grid = sp.build_cubature(20)
    from spinlets.harmonics import grid_evaluate
    f = grid_evaluate(smooth_truth.harmonic_coeffs, grid.theta, grid.phi)
    direct = float(sp.integrate(np.abs(f) ** 2, grid).real)
    assert abs(loss - direct) < 1e-8


def test_l2_loss_matches_harmonic_parseval(smooth_truth, spin2_mixed_frame):
    # coefficient-space oracle: difference over covered degrees + tail energy
    frame = spin2_mixed_frame
    data = sp.simulate_dataset(smooth_truth, 800, sp.NoiseModel("gaussian", 0.3), seed=10)
    cfg = sp.EstimatorConfig(2.0, 2, "mixed", kappa=1.0, n=800)
    result = sp.fit_threshold_estimator(data, cfg, frame)
    loss = sp.lp_loss(result, smooth_truth, frame, 2)
    est_harm = sp.coefficients_to_harmonic(frame, result.kept)
    L_est = est_harm.band_limit
    L_tr = smooth_truth.band_limit
    top = max(L_est, L_tr)
    diff = np.zeros((top + 1, 2 * top + 1), dtype=complex)
    diff[: L_est + 1, top - L_est : top + L_est + 1] = est_harm.values
    tr = smooth_truth.harmonic_coeffs.values
    diff[: L_tr + 1, top - L_tr : top + L_tr + 1] -= tr
    oracle = float(np.sum(np.abs(diff) ** 2))
    assert abs(loss - oracle) <= 1e-6 * max(oracle, 1e-12)


def test_sup_loss_via_grid(smooth_truth, spin2_mixed_frame):
    # grid sups from different rules agree to the grid resolution, not exactly
    loss_inf = sp.lp_loss(spin2_mixed_frame.empty_coefficients(), smooth_truth,
                          spin2_mixed_frame, np.inf)
    assert abs(loss_inf - smooth_truth.sup_norm) < 1e-2 * smooth_truth.sup_norm


# ------------------------------------------------------------ concentration

def test_concentration_far_tail_is_zero(smooth_truth, spin2_mixed_frame):
    probe = sp.concentration_probe(smooth_truth, spin2_mixed_frame, j=2, n=400,
                                   noise=sp.NoiseModel("gaussian", 0.5),
                                   kappa=50.0, replicates=60, seed=1)
    assert probe.noise_tail[0] == 0.0
    assert probe.deviation_tail[0] == 0.0


def test_concentration_monotone_in_kappa(smooth_truth, spin2_mixed_frame):
    probe = sp.concentration_probe(smooth_truth, spin2_mixed_frame, j=2, n=400,
                                   noise=sp.NoiseModel("gaussian", 0.5),
                                   kappa=[0.5, 1.0, 2.0, 4.0], replicates=80, seed=2)
    assert np.all(np.diff(probe.noise_tail) <= 0)
    assert np.all(np.diff(probe.deviation_tail) <= 0)


def test_concentration_validates_level(smooth_truth, spin2_mixed_frame):
    with pytest.raises(ValueError):
        sp.concentration_probe(smooth_truth, spin2_mixed_frame, j=4, n=50,
                               noise=sp.NoiseModel("gaussian", 0.5),
                               kappa=1.0, replicates=5)


# ----------------------------------------------------------- serialization

def test_dataset_round_trip(smooth_truth):
    data = sp.simulate_dataset(smooth_truth, 60, sp.NoiseModel("gaussian", 0.2), seed=12)
    buf = io.StringIO()
    sp.write_dataset(data, buf)
    buf.seek(0)
    back = sp.read_dataset(buf)
    assert back.n == data.n and back.spin == data.spin and back.seed == data.seed
    assert np.abs(back.y - data.y).max() < 1e-16
    assert np.abs(back.theta - data.theta).max() < 1e-16


def test_estimate_output_format(smooth_truth):
    n = 300
    data = sp.simulate_dataset(smooth_truth, n, sp.NoiseModel("gaussian", 0.2), seed=13)
    cfg = sp.EstimatorConfig(2.0, 2, "mixed", kappa=1.0, n=n)
    frame = sp.build_frame(2.0, 2, "mixed", cfg.j_cutoff)
    result = sp.fit_threshold_estimator(data, cfg, frame)
    buf = io.StringIO()
    sp.write_estimate(result, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == frame.frame_id
    assert lines[1].startswith("J_n=") and "kappa=" in lines[1] and "t_n=" in lines[1]
    assert f"kept_total={result.kept_total}" in lines[1]
    assert len(lines) == 2 + result.kept.count()
