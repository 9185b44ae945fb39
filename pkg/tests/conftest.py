import numpy as np
import pytest

import spinlets as sp


@pytest.fixture(scope="session")
def spin2_pure_frame():
    return sp.build_frame(2.0, 2, "pure_spin", 4)


@pytest.fixture(scope="session")
def spin2_mixed_frame():
    return sp.build_frame(2.0, 2, "mixed", 4)


@pytest.fixture(scope="session")
def scalar_frame():
    return sp.build_frame(2.0, 0, "scalar", 4)


def random_section(band_limit, spin, seed, scale=1.0):
    """Band-limited harmonic coefficients with Gaussian entries, l > spin."""
    rng = np.random.default_rng(seed)
    c = sp.HarmonicCoefficients(band_limit, spin)
    L = band_limit
    for l in range(spin + 1, band_limit + 1):
        c.values[l, L - l : L + l + 1] = scale * (
            rng.standard_normal(2 * l + 1) + 1j * rng.standard_normal(2 * l + 1)
        )
    return c


@pytest.fixture(scope="session")
def spin2_section():
    return random_section(8, 2, seed=42)
