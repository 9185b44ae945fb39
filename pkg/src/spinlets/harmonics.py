"""Scalar and spin-weighted spherical harmonics.

Evaluation runs a Wigner-d style three-term recursion in the degree l at
fixed (order m, spin s), seeded at l = max(|m|, |s|).  The recursion is the
only numerically usable route; the first-order ladder-operator definition is
kept as a finite-difference test oracle in :mod:`spinlets.eth`.

Conventions
-----------
* Scalar harmonics carry no Condon-Shortley phase:
  ``Y_lm = exp(i m phi) sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_lm(cos theta)``
  with ``P_lm = (1-x^2)^(m/2) d^m/dx^m P_l(x)``.
* Negative orders come from the conjugation symmetry
  ``Y_{l,-m} = (-1)^m conj(Y_{lm})``.
* Spin-weighted harmonics are normalized so that raising the spin with the
  eth operator gives ``eth Y_{lm;s} = sqrt((l-s)(l+s+1)) Y_{lm;s+1}``, and
  reduce bitwise to the scalar harmonics at s = 0.  Relative to the common
  Goldberg et al. convention this drops the leading (-1)^m.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

# the portable threading layer avoids numba's TBB version probing (and its
# warning) on hosts with an older TBB
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

import numba
import numpy as np

from .directions import check_direction_arrays

__all__ = [
    "HarmonicIndex",
    "HarmonicCoefficients",
    "eigenvalue_spin",
    "legendre_assoc",
    "ylm",
    "spin_ylm",
    "lambda_colatitude",
    "project_scattered",
    "evaluate_scattered",
    "grid_project",
    "grid_evaluate",
]

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class HarmonicIndex:
    """Degree/order/spin triple with the usual admissibility constraints."""

    l: int
    m: int
    s: int = 0

    def __post_init__(self):
        if self.l < 0:
            raise ValueError(f"degree must be non-negative, got l={self.l}")
        if abs(self.m) > self.l:
            raise ValueError(f"order out of range: |m|={abs(self.m)} > l={self.l}")
        if self.l < abs(self.s):
            raise ValueError(f"degree below spin: l={self.l} < |s|={abs(self.s)}")


def eigenvalue_spin(l: int, s: int) -> float:
    """Eigenvalue (l - s)(l + s + 1) of the spin Laplacian -eth_bar eth."""
    if l < abs(s):
        raise ValueError(f"degree below spin: l={l} < |s|={abs(s)}")
    return float((l - s) * (l + s + 1))


def legendre_assoc(l: int, m: int, x: float) -> float:
    """Associated Legendre function (1-x^2)^(m/2) d^m/dx^m P_l(x).

    No Condon-Shortley phase.  Standard upward recursion in l at fixed m.
    """
    if not 0 <= m <= l:
        raise ValueError(f"order must satisfy 0 <= m <= l, got l={l}, m={m}")
    x = float(x)
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"argument must lie in [-1, 1], got {x!r}")
    # P_mm = (2m-1)!! (1-x^2)^(m/2)
    pmm = 1.0
    if m > 0:
        somx2 = math.sqrt((1.0 - x) * (1.0 + x))
        fact = 1.0
        for _ in range(m):
            pmm *= fact * somx2
            fact += 2.0
    if l == m:
        return pmm
    pmmp1 = x * (2.0 * m + 1.0) * pmm
    if l == m + 1:
        return pmmp1
    for ll in range(m + 2, l + 1):
        pll = (x * (2.0 * ll - 1.0) * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m)
        pmm = pmmp1
        pmmp1 = pll
    return pmmp1


def _canonical_order(s: int, m: int):
    """Map (s, m) to the recursion-canonical pair with m >= |s| >= 0.

    Returns (s', m', sign) so that Lambda(s, m) = sign * Lambda_canonical(s', m'),
    where the overall (-1)^m of our phase convention is already folded in.
    """
    sign = 1.0 if m % 2 == 0 else -1.0  # our convention drops Goldberg's (-1)^m
    ss, mm = s, m
    if abs(mm) < abs(ss):
        ss, mm = mm, ss
        if (mm + ss) % 2:
            sign = -sign
    if mm < 0:
        ss, mm = -ss, -mm
        if (mm + ss) % 2:
            sign = -sign
    if mm % 2:  # sign of the canonical recursion seed (-1/2)^mm (...)
        sign = -sign
    return ss, mm, sign


def _recursion_factors(ss: int, mm: int, lmax: int):
    """Per-degree coefficients of the three-term recursion at fixed (mm, ss)."""
    ls = np.arange(lmax + 2, dtype=float)
    l2 = ls * ls
    cf = np.zeros(lmax + 2)
    df = np.zeros(lmax + 2)
    ef = np.zeros(lmax + 2)
    lo = max(abs(mm), abs(ss))
    if lo + 1 <= lmax:
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.sqrt(l2 * (4.0 * l2 - 1.0) / ((l2 - mm * mm) * (l2 - ss * ss)))
        cf[lo + 1 :] = c[lo + 1 :]
        denom = ls * (ls - 1.0)
        denom[denom == 0.0] = 1.0
        df[:] = ss * mm / denom
        ef[lo + 2 :] = cf[lo + 2 :] / cf[lo + 1 : -1]
    return cf, df, ef


def _seed_exponent(ss: int, mm: int) -> float:
    return 0.5 * (
        math.lgamma(2 * mm + 2)
        - math.log(FOUR_PI)
        - math.lgamma(mm + ss + 1)
        - math.lgamma(mm - ss + 1)
    ) + mm * math.log(0.5)


@numba.njit(parallel=True)
def _project_kernel(ss, mm, lmax, sign, expo, cf, df, ef, x, w_re, w_im, out_re, out_im):
    """out[l] += sum_i Lambda_l(x_i) w_i for l in [mm, lmax]; Lambda recursion fused."""
    n = x.shape[0]
    nl = lmax - mm + 1
    nthread = numba.get_num_threads()
    acc_re = np.zeros((nthread, nl))
    acc_im = np.zeros((nthread, nl))
    half_ms = 0.5 * (mm - ss)
    half_ps = 0.5 * (mm + ss)
    s_over = ss / (mm + 1.0)
    for tid in numba.prange(nthread):
        lo = tid * n // nthread
        hi = (tid + 1) * n // nthread
        for i in range(lo, hi):
            xi = x[i]
            lp = expo
            if mm != ss:
                lp += half_ms * math.log1p(xi)
            if mm != -ss:
                lp += half_ps * math.log1p(-xi)
            pm = sign * math.exp(lp)
            wr = w_re[i]
            wi = w_im[i]
            acc_re[tid, 0] += pm * wr
            acc_im[tid, 0] += pm * wi
            if lmax > mm:
                pm1 = cf[mm + 1] * (xi + s_over) * pm
                acc_re[tid, 1] += pm1 * wr
                acc_im[tid, 1] += pm1 * wi
                for l in range(mm + 2, lmax + 1):
                    pn = cf[l] * (xi + df[l]) * pm1 - ef[l] * pm
                    pm = pm1
                    pm1 = pn
                    acc_re[tid, l - mm] += pm1 * wr
                    acc_im[tid, l - mm] += pm1 * wi
    for t in range(nthread):
        for k in range(nl):
            out_re[mm + k] += acc_re[t, k]
            out_im[mm + k] += acc_im[t, k]


@numba.njit(parallel=True)
def _expand_kernel(ss, mm, lmax, sign, expo, cf, df, ef, x, c_re, c_im, out_re, out_im):
    """out[i] += sum_l c_l Lambda_l(x_i) for l in [mm, lmax]; recursion fused."""
    n = x.shape[0]
    half_ms = 0.5 * (mm - ss)
    half_ps = 0.5 * (mm + ss)
    s_over = ss / (mm + 1.0)
    for i in numba.prange(n):
        xi = x[i]
        lp = expo
        if mm != ss:
            lp += half_ms * math.log1p(xi)
        if mm != -ss:
            lp += half_ps * math.log1p(-xi)
        pm = sign * math.exp(lp)
        a_re = c_re[mm] * pm
        a_im = c_im[mm] * pm
        if lmax > mm:
            pm1 = cf[mm + 1] * (xi + s_over) * pm
            a_re += c_re[mm + 1] * pm1
            a_im += c_im[mm + 1] * pm1
            for l in range(mm + 2, lmax + 1):
                pn = cf[l] * (xi + df[l]) * pm1 - ef[l] * pm
                pm = pm1
                pm1 = pn
                a_re += c_re[l] * pm1
                a_im += c_im[l] * pm1
        out_re[i] += a_re
        out_im[i] += a_im


def lambda_colatitude(s: int, m: int, lmax: int, x):
    """Colatitude factor Lambda of Y_{lm;s} = Lambda_{l}(cos theta) e^{i m phi}.

    Returns a real array of shape (lmax + 1, len(x)); rows with l < max(|m|, |s|)
    are zero.  Reference implementation in plain numpy, used for small grids
    and as the cross-check for the fused kernels.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((lmax + 1, x.shape[0]))
    ss, mm, sign = _canonical_order(s, m)
    if mm > lmax:
        return out
    logp = np.full(x.shape[0], _seed_exponent(ss, mm))
    if mm != ss:
        logp += (0.5 * (mm - ss)) * np.log1p(x)
    if mm != -ss:
        logp += (0.5 * (mm + ss)) * np.log1p(-x)
    pm = sign * np.exp(logp)
    out[mm] = pm
    if mm + 1 <= lmax:
        cf, df, ef = _recursion_factors(ss, mm, lmax)
        pm1 = cf[mm + 1] * (x + ss / (mm + 1.0)) * pm
        out[mm + 1] = pm1
        for l in range(mm + 2, lmax + 1):
            pn = cf[l] * (x + df[l]) * pm1 - ef[l] * pm
            pm, pm1 = pm1, pn
            out[l] = pm1
    return out


def spin_ylm(l: int, m: int, s: int, theta, phi):
    """Spin-s spherical harmonic Y_{lm;s} at the given directions.

    Scalars in, scalar out; arrays in, arrays out.
    """
    HarmonicIndex(l, m, s)
    scalar_in = np.ndim(theta) == 0 and np.ndim(phi) == 0
    theta, phi = check_direction_arrays(theta, phi)
    lam = lambda_colatitude(s, m, l, np.cos(theta))[l]
    values = lam * np.exp(1j * m * phi)
    if scalar_in:
        return complex(values[0])
    return values


def ylm(l: int, m: int, theta, phi):
    """Scalar spherical harmonic; identical code path to spin_ylm with s = 0."""
    return spin_ylm(l, m, 0, theta, phi)


class HarmonicCoefficients:
    """Dense table of harmonic coefficients a_{lm;s} for l <= band_limit.

    Stored as a complex array of shape (L+1, 2L+1) with column index m + L.
    """

    def __init__(self, band_limit: int, spin: int = 0, values=None):
        if band_limit < 0:
            raise ValueError("band limit must be non-negative")
        self.band_limit = int(band_limit)
        self.spin = int(spin)
        shape = (self.band_limit + 1, 2 * self.band_limit + 1)
        if values is None:
            self.values = np.zeros(shape, dtype=complex)
        else:
            values = np.asarray(values, dtype=complex)
            if values.shape != shape:
                raise ValueError(f"expected coefficient array of shape {shape}")
            if not np.all(np.isfinite(values)):
                raise ValueError("coefficients must be finite")
            self.values = values.copy()
        self._mask_invalid()

    def _mask_invalid(self):
        L = self.band_limit
        for l in range(L + 1):
            self.values[l, : L - l] = 0.0
            self.values[l, L + l + 1 :] = 0.0

    def get(self, l: int, m: int) -> complex:
        HarmonicIndex(l, m, self.spin if l >= abs(self.spin) else 0)
        return complex(self.values[l, m + self.band_limit])

    def set(self, l: int, m: int, value: complex):
        if abs(m) > l or l > self.band_limit:
            raise ValueError(f"index (l={l}, m={m}) out of range")
        if not np.isfinite(value):
            raise ValueError("coefficients must be finite")
        self.values[l, m + self.band_limit] = value

    def copy(self) -> "HarmonicCoefficients":
        return HarmonicCoefficients(self.band_limit, self.spin, self.values)

    def scaled(self, factor) -> "HarmonicCoefficients":
        out = self.copy()
        out.values *= factor
        return out

    def energy(self) -> float:
        """Total squared coefficient mass sum |a_lm|^2."""
        return float(np.sum(np.abs(self.values) ** 2))

    def min_degree_with_energy(self):
        nz = np.nonzero(np.abs(self.values).sum(axis=1))[0]
        return int(nz[0]) if nz.size else None

    def max_degree_with_energy(self):
        nz = np.nonzero(np.abs(self.values).sum(axis=1))[0]
        return int(nz[-1]) if nz.size else None


def project_scattered(theta, phi, weights, lmax: int, spin: int) -> HarmonicCoefficients:
    """Weighted conjugate projection sum_i w_i conj(Y_{lm;s}(x_i)) for all l, m."""
    theta, phi = check_direction_arrays(theta, phi)
    w = np.ascontiguousarray(np.asarray(weights, dtype=complex).ravel())
    if w.shape != theta.shape:
        raise ValueError("weights must align with the directions")
    x = np.ascontiguousarray(np.cos(theta))
    out = HarmonicCoefficients(lmax, spin)
    phase_down = np.exp(-1j * phi)
    wm_pos = w.copy()
    wm_neg = w.copy()
    for m in range(0, lmax + 1):
        if m > 0:
            wm_pos = wm_pos * phase_down
            wm_neg = wm_neg * np.conj(phase_down)
        for mm, wm in ((m, wm_pos),) if m == 0 else ((m, wm_pos), (-m, wm_neg)):
            ss, mc, sign = _canonical_order(spin, mm)
            if mc > lmax:
                continue
            cf, df, ef = _recursion_factors(ss, mc, lmax)
            out_re = np.zeros(lmax + 1)
            out_im = np.zeros(lmax + 1)
            _project_kernel(
                ss, mc, lmax, sign, _seed_exponent(ss, mc), cf, df, ef,
                x, np.ascontiguousarray(wm.real), np.ascontiguousarray(wm.imag),
                out_re, out_im,
            )
            col = out.values[:, mm + lmax]
            col += out_re + 1j * out_im
    out._mask_invalid()
    return out


def evaluate_scattered(coeffs: HarmonicCoefficients, theta, phi):
    """Evaluate sum_lm a_lm Y_{lm;s} at scattered directions."""
    theta, phi = check_direction_arrays(theta, phi)
    x = np.ascontiguousarray(np.cos(theta))
    L = coeffs.band_limit
    spin = coeffs.spin
    out_re = np.zeros(theta.shape[0])
    out_im = np.zeros(theta.shape[0])
    phase_up = np.exp(1j * phi)
    em_pos = np.ones(theta.shape[0], dtype=complex)
    em_neg = np.ones(theta.shape[0], dtype=complex)
    for m in range(0, L + 1):
        if m > 0:
            em_pos = em_pos * phase_up
            em_neg = em_neg * np.conj(phase_up)
        for mm, em in ((m, em_pos),) if m == 0 else ((m, em_pos), (-m, em_neg)):
            col = coeffs.values[:, mm + L]
            if not np.any(col):
                continue
            ss, mc, sign = _canonical_order(spin, mm)
            if mc > L:
                continue
            cf, df, ef = _recursion_factors(ss, mc, L)
            g_re = np.zeros(theta.shape[0])
            g_im = np.zeros(theta.shape[0])
            _expand_kernel(
                ss, mc, L, sign, _seed_exponent(ss, mc), cf, df, ef,
                x, np.ascontiguousarray(col.real), np.ascontiguousarray(col.imag),
                g_re, g_im,
            )
            gm = (g_re + 1j * g_im) * em
            out_re += gm.real
            out_im += gm.imag
    return out_re + 1j * out_im


def grid_project(field, theta, theta_weights, phi, phi_weight, lmax, spin) -> HarmonicCoefficients:
    """Cubature projection of a field sampled on a theta x phi product grid.

    Computes a_lm = sum_{i,t} w_i w_phi field[i,t] conj(Y_{lm;s}(theta_i, phi_t))
    by separating the azimuthal sums (one matrix product) from the colatitude
    recursion.
    """
    field = np.asarray(field, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if field.shape != (theta.size, phi.size):
        raise ValueError("field shape must be (len(theta), len(phi))")
    ms = np.arange(-lmax, lmax + 1)
    # H[i, m] = w_phi * sum_t field[i, t] e^{-i m phi_t}
    emat = np.exp(-1j * np.outer(phi, ms))
    H = (field @ emat) * phi_weight
    out = HarmonicCoefficients(lmax, spin)
    x = np.ascontiguousarray(np.cos(theta))
    for im, m in enumerate(ms):
        ss, mc, sign = _canonical_order(spin, int(m))
        if mc > lmax:
            continue
        w = theta_weights * H[:, im]
        cf, df, ef = _recursion_factors(ss, mc, lmax)
        out_re = np.zeros(lmax + 1)
        out_im = np.zeros(lmax + 1)
        _project_kernel(
            ss, mc, lmax, sign, _seed_exponent(ss, mc), cf, df, ef,
            x, np.ascontiguousarray(w.real), np.ascontiguousarray(w.imag),
            out_re, out_im,
        )
        out.values[:, m + lmax] = out_re + 1j * out_im
    out._mask_invalid()
    return out


def grid_evaluate(coeffs: HarmonicCoefficients, theta, phi):
    """Evaluate a harmonic expansion on a theta x phi product grid.

    Returns a complex array of shape (len(theta), len(phi)).
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    L = coeffs.band_limit
    spin = coeffs.spin
    ms = np.arange(-L, L + 1)
    G = np.zeros((ms.size, theta.size), dtype=complex)
    x = np.ascontiguousarray(np.cos(theta))
    for im, m in enumerate(ms):
        col = coeffs.values[:, m + L]
        if not np.any(col):
            continue
        ss, mc, sign = _canonical_order(spin, int(m))
        if mc > L:
            continue
        cf, df, ef = _recursion_factors(ss, mc, L)
        g_re = np.zeros(theta.size)
        g_im = np.zeros(theta.size)
        _expand_kernel(
            ss, mc, L, sign, _seed_exponent(ss, mc), cf, df, ef,
            x, np.ascontiguousarray(col.real), np.ascontiguousarray(col.imag),
            g_re, g_im,
        )
        G[im] = g_re + 1j * g_im
    emat = np.exp(1j * np.outer(phi, ms))
    return (emat @ G).T
