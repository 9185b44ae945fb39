import math

import numpy as np
import pytest

import spinlets as sp
from spinlets.harmonics import (HarmonicCoefficients, HarmonicIndex,
                                evaluate_scattered, grid_evaluate, grid_project,
                                lambda_colatitude, project_scattered)

from conftest import random_section

FOUR_PI = 4.0 * np.pi


# ---------------------------------------------------------------- legendre

def test_legendre_trivial_cases():
    assert sp.legendre_assoc(0, 0, 0.3) == 1.0
    assert np.isclose(sp.legendre_assoc(1, 1, 0.0), 1.0, atol=1e-15)


def test_legendre_against_symbolic_derivative():
    # oracle: (1-x^2)^(m/2) d^m/dx^m P_l(x) via sympy, frozen at (2,1,0.5)
    import sympy

    x = sympy.symbols("x")
    p2 = sympy.legendre(2, x)
    oracle = float(((1 - x**2) ** sympy.Rational(1, 2) * sympy.diff(p2, x)).subs(x, 0.5))
    assert np.isclose(oracle, 1.299038105676658, atol=1e-12)
    assert np.isclose(sp.legendre_assoc(2, 1, 0.5), oracle, atol=1e-12)


def test_legendre_matches_scipy_modulo_phase():
    from scipy.special import lpmv  # includes the Condon-Shortley phase

    rng = np.random.default_rng(0)
    for _ in range(40):
        l = int(rng.integers(0, 15))
        m = int(rng.integers(0, l + 1))
        x = float(rng.uniform(-1, 1))
        ours = sp.legendre_assoc(l, m, x)
        ref = (-1.0) ** m * lpmv(m, l, x)
        assert np.isclose(ours, ref, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("l,m,x", [(2, 3, 0.1), (2, -1, 0.1), (2, 1, 1.5)])
def test_legendre_domain_errors(l, m, x):
    with pytest.raises(ValueError):
        sp.legendre_assoc(l, m, x)


# ---------------------------------------------------------------- ylm

def test_ylm_constant_mode():
    assert np.isclose(sp.ylm(0, 0, 1.1, 2.2), 1.0 / math.sqrt(FOUR_PI))


def test_ylm_zero_at_equator():
    assert abs(sp.ylm(1, 0, np.pi / 2, 0.3)) < 1e-16


def test_ylm_l1_m1_closed_form():
    # no Condon-Shortley phase: positive at (pi/2, 0)
    assert np.isclose(sp.ylm(1, 1, np.pi / 2, 0.0), math.sqrt(3.0 / (8.0 * np.pi)))


def test_ylm_closed_form_general():
    rng = np.random.default_rng(3)
    for _ in range(25):
        l = int(rng.integers(0, 9))
        m = int(rng.integers(0, l + 1))
        th = float(rng.uniform(0.05, np.pi - 0.05))
        ph = float(rng.uniform(-np.pi, np.pi))
        norm = math.sqrt(
            (2 * l + 1) / FOUR_PI * math.factorial(l - m) / math.factorial(l + m)
        )
        ref = norm * sp.legendre_assoc(l, m, math.cos(th)) * np.exp(1j * m * ph)
        assert abs(sp.ylm(l, m, th, ph) - ref) < 1e-12


def test_ylm_negative_m_conjugation():
    rng = np.random.default_rng(4)
    for _ in range(20):
        l = int(rng.integers(1, 10))
        m = int(rng.integers(1, l + 1))
        th = float(rng.uniform(0.05, np.pi - 0.05))
        ph = float(rng.uniform(-np.pi, np.pi))
        lhs = sp.ylm(l, -m, th, ph)
        rhs = (-1.0) ** m * np.conj(sp.ylm(l, m, th, ph))
        assert abs(lhs - rhs) < 1e-14


# ---------------------------------------------------------------- eigenvalues

@pytest.mark.parametrize("l,s,want", [(2, 2, 0.0), (3, 2, 6.0), (10, 0, 110.0)])
def test_eigenvalue_spin_values(l, s, want):
    assert sp.eigenvalue_spin(l, s) == want


def test_eigenvalue_spin_rejects_low_degree():
    with pytest.raises(ValueError):
        sp.eigenvalue_spin(1, 2)


def test_harmonic_index_invariants():
    HarmonicIndex(3, -3, 2)
    with pytest.raises(ValueError):
        HarmonicIndex(2, 3, 0)
    with pytest.raises(ValueError):
        HarmonicIndex(1, 0, 2)


# ---------------------------------------------------------------- spin_ylm

def _goldberg_sum(l, m, s, theta, phi):
    """Explicit binomial-sum spin harmonic, without the (-1)^m prefactor."""
    pref = math.sqrt(
        math.factorial(l + m) * math.factorial(l - m) * (2 * l + 1)
        / (FOUR_PI * math.factorial(l + s) * math.factorial(l - s))
    )
    half = 0.5 * theta
    total = 0.0
    for r in range(0, l - s + 1):
        if not 0 <= r + s - m <= l + s:
            continue
        term = (
            math.comb(l - s, r)
            * math.comb(l + s, r + s - m)
            * (-1.0) ** (l - r - s)
            * (math.cos(half) / math.sin(half)) ** (2 * r + s - m)
        )
        total += term
    return pref * math.sin(half) ** (2 * l) * total * np.exp(1j * m * phi)


def test_spin_ylm_matches_explicit_sum():
    rng = np.random.default_rng(5)
    for _ in range(60):
        s = int(rng.integers(-2, 3))
        l = int(rng.integers(abs(s), 7))
        m = int(rng.integers(-l, l + 1)) if l else 0
        th = float(rng.uniform(0.2, np.pi - 0.2))
        ph = float(rng.uniform(-np.pi, np.pi))
        ours = sp.spin_ylm(l, m, s, th, ph)
        ref = _goldberg_sum(l, m, s, th, ph)
        assert abs(ours - ref) < 1e-10, (l, m, s)


def test_spin_ylm_s0_is_ylm_bitwise(scalar_frame):
    rng = np.random.default_rng(6)
    for _ in range(20):
        l = int(rng.integers(0, 12))
        m = int(rng.integers(-l, l + 1)) if l else 0
        th = float(rng.uniform(0.05, np.pi - 0.05))
        ph = float(rng.uniform(-np.pi, np.pi))
        assert sp.spin_ylm(l, m, 0, th, ph) == sp.ylm(l, m, th, ph)


def test_spin_ylm_rejects_degree_below_spin():
    with pytest.raises(ValueError):
        sp.spin_ylm(1, 0, 2, 1.0, 0.0)


def test_spin_addition_theorem_diagonal():
    # sum_m |Y_lm;s|^2 is constant in x and equals (2l+1)/(4 pi)
    l = 4
    want = (2 * l + 1) / FOUR_PI
    for s in (0, 1, 2):
        for (th, ph) in [(0.4, 0.0), (1.3, 2.0), (2.8, -1.1)]:
            tot = sum(
                abs(sp.spin_ylm(l, m, s, th, ph)) ** 2 for m in range(-l, l + 1)
            )
            assert abs(tot - want) < 1e-12


def test_spin_orthonormality_by_cubature():
    rule = sp.build_cubature(8)
    th, ph, w = rule.node_arrays()
    for s in (0, 1, 2):
        pairs = [(3, 1, 3, 1), (3, 1, 4, 1), (5, -2, 5, -2), (4, 2, 6, 2)]
        for (l1, m1, l2, m2) in pairs:
            if l1 < abs(s) or l2 < abs(s):
                continue
            f1 = sp.spin_ylm(l1, m1, s, th, ph)
            f2 = sp.spin_ylm(l2, m2, s, th, ph)
            val = sp.integrate(f1 * np.conj(f2), rule)
            want = 1.0 if (l1, m1) == (l2, m2) else 0.0
            assert abs(val - want) < 1e-10


def test_spin_ylm_unit_norm_single_mode():
    # cubature of |Y_31;2|^2 over the sphere equals 1
    rule = sp.build_cubature(3)
    th, ph, _ = rule.node_arrays()
    f = sp.spin_ylm(3, 1, 2, th, ph)
    assert abs(sp.integrate(np.abs(f) ** 2, rule) - 1.0) < 1e-10


# ------------------------------------------------- vector transform engines

def test_lambda_block_matches_pointwise():
    x = np.linspace(-0.95, 0.95, 7)
    blk = lambda_colatitude(2, -1, 6, x)
    for l in range(2, 7):
        vals = sp.spin_ylm(l, -1, 2, np.arccos(x), np.zeros_like(x))
        assert np.allclose(blk[l], vals.real, atol=1e-13)


def test_project_scattered_single_point_is_conjugate():
    th, ph = np.array([0.9]), np.array([1.7])
    table = project_scattered(th, ph, np.array([1.0 + 0j]), 5, 2)
    for l in range(2, 6):
        for m in range(-l, l + 1):
            want = np.conj(sp.spin_ylm(l, m, 2, th[0], ph[0]))
            assert abs(table.get(l, m) - want) < 1e-13


def test_grid_roundtrip_recovers_coefficients():
    c = random_section(10, 2, seed=9)
    rule = sp.build_cubature(10)
    f = grid_evaluate(c, rule.theta, rule.phi)
    c2 = grid_project(f, rule.theta, rule.theta_weights, rule.phi,
                      rule.phi_weight, 10, 2)
    assert np.abs(c2.values - c.values).max() < 1e-12


def test_evaluate_scattered_matches_direct_sum():
    c = random_section(5, 0, seed=10)
    th = np.array([0.8, 2.1])
    ph = np.array([-0.5, 2.9])
    fast = evaluate_scattered(c, th, ph)
    direct = np.zeros(2, dtype=complex)
    for l in range(6):
        for m in range(-l, l + 1):
            direct += c.get(l, m) * sp.ylm(l, m, th, ph)
    assert np.abs(fast - direct).max() < 1e-12


def test_harmonic_coefficients_validation():
    c = HarmonicCoefficients(4, 2)
    c.set(3, -2, 1.0 + 2.0j)
    assert c.get(3, -2) == 1.0 + 2.0j
    with pytest.raises(ValueError):
        c.set(2, 3, 1.0)
    with pytest.raises(ValueError):
        c.set(3, 0, complex(np.nan, 0.0))
