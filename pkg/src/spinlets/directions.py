"""Points on the sphere in colatitude/longitude coordinates.

All spin quantities in this package live in the single chart covering the
sphere minus the two poles, so colatitudes are restricted to the open
interval (0, pi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

# callers that need near-pole values clamp into [POLE_MARGIN, pi - POLE_MARGIN]
POLE_MARGIN = 1e-9


def normalize_longitude(phi):
    """Wrap longitudes into [-pi, pi)."""
    out = np.mod(np.asarray(phi, dtype=float) + np.pi, TWO_PI) - np.pi
    # mod can round up to exactly pi for inputs just below a wrap point
    out = np.where(out >= np.pi, -np.pi, out)
    if np.ndim(phi) == 0:
        return float(out)
    return out


def clamp_colatitude(theta):
    """Push colatitudes strictly inside (0, pi)."""
    return np.clip(theta, POLE_MARGIN, np.pi - POLE_MARGIN)


@dataclass(frozen=True)
class Direction:
    """A single point on the sphere, poles excluded."""

    theta: float
    phi: float

    def __post_init__(self):
        theta = float(self.theta)
        if not 0.0 < theta < np.pi:
            raise ValueError(
                f"colatitude must lie strictly inside (0, pi), got {theta!r}"
            )
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", normalize_longitude(float(self.phi)))


def check_direction_arrays(theta, phi):
    """Validate and normalize paired colatitude/longitude arrays.

    Returns float arrays of equal shape with longitudes wrapped into
    [-pi, pi).  Raises ValueError on pole hits, NaNs, or shape mismatch.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if theta.shape != phi.shape:
        raise ValueError(
            f"theta and phi must have matching shapes, got {theta.shape} vs {phi.shape}"
        )
    if not np.all(np.isfinite(theta)) or not np.all(np.isfinite(phi)):
        raise ValueError("directions must be finite")
    if np.any(theta <= 0.0) or np.any(theta >= np.pi):
        raise ValueError("colatitudes must lie strictly inside (0, pi)")
    return theta, normalize_longitude(phi)


def as_direction_arrays(x):
    """Coerce a Direction, an (n, 2) array, or a (theta, phi) pair to arrays."""
    if isinstance(x, Direction):
        return np.array([x.theta]), np.array([x.phi])
    if isinstance(x, tuple) and len(x) == 2:
        return check_direction_arrays(x[0], x[1])
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return check_direction_arrays(arr[:, 0], arr[:, 1])
    raise ValueError(
        "expected a Direction, a (theta, phi) pair, or an (n, 2) array of angles"
    )
