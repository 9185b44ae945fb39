"""Smooth needlet window with compact support and the partition property.

Standard mollifier construction: a C-infinity bump exp(-a/(1-u^2)) is
integrated into a smooth step, composed into a decreasing profile phi on
[0, 1] with phi = 1 below 1/B, and the window is b(t) = sqrt(phi(t/B) -
phi(t)).  By telescoping, sum_j b^2(t / B^j) = 1 for every t >= 1.
"""

from __future__ import annotations

import numpy as np

__all__ = ["WindowFunction", "build_window"]

_GAUSS_NODES = 384


class WindowFunction:
    """Needlet profile b with support contained in [1/B, B]."""

    def __init__(self, bandwidth: float, smoothness: float = 1.0, table_size: int = 512):
        if bandwidth <= 1.0:
            raise ValueError(f"bandwidth must exceed 1, got {bandwidth!r}")
        if smoothness <= 0.0:
            raise ValueError("smoothness must be positive")
        self.bandwidth = float(bandwidth)
        self.smoothness = float(smoothness)
        x, w = np.polynomial.legendre.leggauss(_GAUSS_NODES)
        self._gauss_x = x
        self._gauss_w = w
        self._total = self._bump_integral(1.0)
        # dense samples across the support, kept for inspection and plotting
        self.table_t = np.linspace(1.0 / self.bandwidth, self.bandwidth, table_size)
        self.table_b = self(self.table_t)

    def _bump(self, u):
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        ui = u[inside]
        out[inside] = np.exp(-self.smoothness / (1.0 - ui * ui))
        return out

    def _bump_integral(self, upper):
        """integral_{-1}^{upper} exp(-a/(1-u^2)) du on a fixed Gauss rule."""
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        half = 0.5 * (upper + 1.0)
        nodes = -1.0 + half[:, None] * (self._gauss_x[None, :] + 1.0)
        vals = self._bump(nodes)
        return (vals @ self._gauss_w) * half

    def _step(self, u):
        """Smooth step: 0 for u <= -1, 1 for u >= 1."""
        u = np.clip(u, -1.0, 1.0)
        return self._bump_integral(u) / self._total

    def _profile(self, q):
        """Decreasing C-infinity profile: 1 on [0, 1/B], 0 on [1, inf)."""
        B = self.bandwidth
        q = np.asarray(q, dtype=float)
        out = np.ones_like(q)
        out[q >= 1.0] = 0.0
        mid = (q > 1.0 / B) & (q < 1.0)
        if np.any(mid):
            out[mid] = self._step(1.0 - (2.0 * B / (B - 1.0)) * (q[mid] - 1.0 / B))
        return out

    def squared(self, t):
        """b^2(t); exact zero outside (1/B, B)."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < 0.0):
            raise ValueError("window argument must be non-negative")
        val = self._profile(t / self.bandwidth) - self._profile(t)
        val = np.maximum(val, 0.0)
        val[(t <= 1.0 / self.bandwidth) | (t >= self.bandwidth)] = 0.0
        return float(val[0]) if scalar else val

    def __call__(self, t):
        sq = self.squared(t)
        return np.sqrt(sq)

    @property
    def support(self):
        return (1.0 / self.bandwidth, self.bandwidth)


def build_window(bandwidth: float, smoothness: float = 1.0) -> WindowFunction:
    return WindowFunction(bandwidth, smoothness)
