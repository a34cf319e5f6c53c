"""Sparse symmetric chaos series: diagnostics, fourth cumulants, quadratic expansions and simulation."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .kernels import (AffineChaos, ChaosCoefficients, SymmetricKernel, derivative, eps0,
                      evaluate_batch, evaluate_series, gradient_second_moment, influence,
                      influence_profile, level_norm, make_kernel, min_active_level_norm, normalize,
                      series_second_moment, truncate, weighted_norm)
from .contraction import check_contraction_inequalities, contract, kappa4, kappa_bar, symmetrize
