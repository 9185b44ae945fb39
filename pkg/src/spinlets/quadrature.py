"""Cubature rules exact for band-limited integrands on the sphere.

A rule of degree L combines Gauss-Legendre nodes in colatitude with an
equispaced longitude ring, and integrates every product Y_lm conj(Y_l'm')
with l, l' <= L exactly (spin-weighted pairs included: at equal orders the
colatitude factor of such a product is a polynomial of degree l + l' in
cos theta, and the azimuthal sums vanish for unequal orders).
"""

from __future__ import annotations

import math

import numpy as np

from .directions import Direction

__all__ = ["CubatureNode", "CubatureSet", "build_cubature", "level_cubature", "integrate"]

FOUR_PI = 4.0 * np.pi


class CubatureNode:
    """One node/weight pair; weight in steradians."""

    __slots__ = ("point", "weight")

    def __init__(self, point: Direction, weight: float):
        if weight <= 0:
            raise ValueError("cubature weights must be positive")
        self.point = point
        self.weight = float(weight)


class CubatureSet:
    """Product rule on the sphere, exact for harmonics up to `degree`.

    Nodes are indexed row-major: k = i * len(phi) + t for colatitude row i
    and longitude column t.
    """

    def __init__(self, degree: int, theta, theta_weights, phi, phi_weight,
                 level=None, bandwidth=None):
        self.degree = int(degree)
        self.theta = np.asarray(theta, dtype=float)
        self.theta_weights = np.asarray(theta_weights, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        self.phi_weight = float(phi_weight)
        self.level = level
        self.bandwidth = bandwidth

    @property
    def node_count(self) -> int:
        return self.theta.size * self.phi.size

    def node(self, k: int) -> CubatureNode:
        i, t = divmod(int(k), self.phi.size)
        if not 0 <= i < self.theta.size:
            raise ValueError(f"node index {k} out of range")
        return CubatureNode(
            Direction(self.theta[i], self.phi[t]),
            self.theta_weights[i] * self.phi_weight,
        )

    def node_arrays(self):
        """Flattened (theta, phi, weight) arrays aligned with node indices."""
        th = np.repeat(self.theta, self.phi.size)
        ph = np.tile(self.phi, self.theta.size)
        w = np.repeat(self.theta_weights * self.phi_weight, self.phi.size)
        return th, ph, w

    def weights_flat(self):
        return np.repeat(self.theta_weights * self.phi_weight, self.phi.size)


def build_cubature(degree: int) -> CubatureSet:
    """Gauss-Legendre x equiangular rule exact for harmonic pairs up to `degree`."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    n_theta = degree + 1
    n_phi = 2 * degree + 1
    x, w = np.polynomial.legendre.leggauss(n_theta)
    order = np.argsort(-x)  # theta = arccos(x) increasing
    theta = np.arccos(x[order])
    theta_weights = w[order]
    phi = -np.pi + (2.0 * np.pi / n_phi) * np.arange(n_phi)
    return CubatureSet(degree, theta, theta_weights, phi, 2.0 * np.pi / n_phi)


def level_cubature(bandwidth: float, level: int) -> CubatureSet:
    """Rule for needlet level j, exact on harmonics up to ceil(2 B^(j+1))."""
    if bandwidth <= 1.0:
        raise ValueError(f"bandwidth must exceed 1, got {bandwidth!r}")
    if level < 0:
        raise ValueError("level must be non-negative")
    degree = int(math.ceil(2.0 * bandwidth ** (level + 1)))
    rule = build_cubature(degree)
    rule.level = int(level)
    rule.bandwidth = float(bandwidth)
    return rule


def integrate(values, rule: CubatureSet):
    """Weighted sum of sampled values against the rule.

    Accepts a flat array aligned with node indices or a (n_theta, n_phi) grid.
    """
    values = np.asarray(values)
    grid_shape = (rule.theta.size, rule.phi.size)
    if values.shape == grid_shape:
        values = values.reshape(-1)
    elif values.shape != (rule.node_count,):
        raise ValueError(
            f"values must have shape {grid_shape} or ({rule.node_count},), got {values.shape}"
        )
    total = values.reshape(grid_shape).sum(axis=1) @ rule.theta_weights
    return total * rule.phi_weight
