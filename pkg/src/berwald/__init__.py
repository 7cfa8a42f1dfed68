"""Numerical certification toolkit for weighted Berwald-type inequalities,
covariograms, radial mean bodies and projection bodies of polytopes."""

from .geometry import (ConvexBody, RoofFunction, GeometryError, simplex, cube,
                       cross_polytope, body_from_vertices, body_from_halfspaces,
                       difference_body, intersect_shift, minkowski_sum,
                       support, radial, volume)
from .measures import (MeasureSpec, ConcavityDescriptor, lebesgue, gaussian,
                       cauchy, exponential, radial_power, measure_catalog,
                       measure_of_body, boundary_measure, descriptor_catalog,
                       gaussian_cdf, gaussian_cdf_inv)
from .quadrature import (Profile1D, DirectionSet, mellin, mellin_log_limit,
                         fractional_limit_check, directions)
from .covariogram import (covariogram_at, polarized_covariogram_at, profile,
                          derivative_at_zero, concavity_check)
from .means import (ConcaveFunction, berwald_constant, berwald_curve,
                    power_mean, equality_certificate, halfspace_moment_ratio,
                    lq_l1_bound, perturbation_check, binom_real,
                    lebesgue_constant, power_constant_closed)
from .starbodies import (radial_mean_body, polarized_mean_body,
                         spectral_mean_body, weighted_projection_body,
                         polar_radial, limit_shape_check, translated_average,
                         homogeneity_check, linear_equivariance_check)
from .certify import (reverse_chain, log_chain, symmetric_chain,
                      good_set_inclusion, rogers_shephard_check, zhang_check,
                      InequalityReport)

__version__ = "0.1.0"


def clear_caches():
    """Drop memoized profiles, measure totals and constants (test isolation)."""
    from . import covariogram as _cov, means as _means, measures as _meas
    _cov.clear_profile_cache()
    _means._CONST_CACHE.clear()
    _meas._TOTAL_CACHE.clear()
