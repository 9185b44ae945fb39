"""Finite-difference spin raising and lowering operators.

These are verification oracles, not production transforms: second-order
accurate stencils on a regular colatitude/longitude grid, with periodic wrap
in longitude.  The raising operator acting on a spin-s field F is

    eth F = -(sin theta)^s [d/dtheta + (i / sin theta) d/dphi] (sin theta)^{-s} F
          = -[d/dtheta + (i / sin theta) d/dphi] F + s (cot theta) F,

and lowering flips the signs of the azimuthal and cotangent terms.  The
stencils differentiate the expanded form (second line), which keeps the
error constant free of the (sin theta)^{-s} amplification of the conjugated
form near the chart edges.
"""

from __future__ import annotations

import numpy as np

from .directions import TWO_PI

__all__ = ["apply_eth"]


def _check_grid(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if theta.ndim != 1 or theta.size < 3 or phi.ndim != 1 or phi.size < 3:
        raise ValueError("grid axes must be 1-D with at least 3 nodes")
    if np.any(theta <= 0.0) or np.any(theta >= np.pi):
        raise ValueError("grid touches the poles; colatitudes must stay inside (0, pi)")
    dth = np.diff(theta)
    if np.any(dth <= 0) or not np.allclose(dth, dth[0], rtol=1e-9, atol=0.0):
        raise ValueError("colatitude nodes must be uniformly increasing")
    dph = np.diff(phi)
    step = TWO_PI / phi.size
    if not np.allclose(dph, step, rtol=1e-9, atol=1e-12):
        raise ValueError("longitude nodes must uniformly cover the full circle")
    return theta, phi, float(dth[0]), float(step)


def _d_theta(g, h):
    out = np.empty_like(g)
    out[1:-1] = (g[2:] - g[:-2]) / (2.0 * h)
    # second-order one-sided stencils at the colatitude ends
    out[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h)
    out[-1] = (3.0 * g[-1] - 4.0 * g[-2] + g[-3]) / (2.0 * h)
    return out


def _d_phi(g, h):
    return (np.roll(g, -1, axis=1) - np.roll(g, 1, axis=1)) / (2.0 * h)


def apply_eth(field, theta, phi, spin: int, raise_spin: bool = True):
    """Apply the spin raising (or lowering) operator to a sampled field.

    field has shape (len(theta), len(phi)) and spin weight `spin`.  Accuracy
    is O(h^2) in each grid spacing.
    """
    theta, phi, h_theta, h_phi = _check_grid(theta, phi)
    field = np.asarray(field, dtype=complex)
    if field.shape != (theta.size, phi.size):
        raise ValueError("field shape must be (len(theta), len(phi))")
    sin_t = np.sin(theta)[:, None]
    cot_t = np.cos(theta)[:, None] / sin_t
    s = int(spin)
    d_th = _d_theta(field, h_theta)
    d_ph = _d_phi(field, h_phi)
    if raise_spin:
        return -(d_th + (1j / sin_t) * d_ph) + s * cot_t * field
    return -(d_th - (1j / sin_t) * d_ph) - s * cot_t * field
