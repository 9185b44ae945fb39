"""Spin needlet frames and adaptive thresholding regression on the sphere."""

from .directions import Direction, normalize_longitude, check_direction_arrays
from .harmonics import (HarmonicIndex, HarmonicCoefficients, eigenvalue_spin,
                        legendre_assoc, spin_ylm, ylm)
from .eth import apply_eth
from .quadrature import CubatureNode, CubatureSet, build_cubature, integrate, level_cubature
from .window import WindowFunction, build_window
from .needlets import (FLAVORS, NeedletCoefficients, NeedletFrame, analyze,
                       build_frame, coefficients_to_harmonic, evaluate_needlet,
                       needlet_harmonic, needlet_lp_norm, read_coefficients,
                       synthesize, tau_l2_norm, write_coefficients)
from .besov import (BesovParams, BesovTestSection, besov_norm, check_embedding,
                    read_section, sample_besov_section, write_section)
from .regression import (Dataset, EstimateResult, EstimatorConfig, NoiseModel,
                         concentration_probe, default_kappa, empirical_harmonics,
                         estimate_coefficients, estimate_field, lp_loss,
                         read_dataset, simulate_dataset, threshold_coefficients,
                         write_dataset, write_estimate)
from .regression import fit as fit_threshold_estimator
from .estimator import NeedletThresholdRegressor
from .rates import (ExperimentConfig, RateResult, alpha_theoretical,
                    estimate_rate, read_config, run_convergence)

__version__ = "0.1.0"
