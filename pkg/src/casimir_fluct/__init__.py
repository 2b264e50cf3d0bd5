"""Disorder-induced fluctuations of the Casimir-Polder potential above a
dilute disordered dielectric half-space.

Main entry points:

* ``eta`` -- reduction factor of the average potential.
* ``gamma_single`` / ``gamma_double`` -- relative fluctuations from single
  and double scattering, in figure-axis scaling.
* ``integrate_2d`` / ``integrate_qmc`` -- the integration engine.
"""
__version__ = "0.1.0"

from .units import DilutenessWarning, InternalUnits, ModelParams, UNITS, effective_epsilon, wick_polarizability
from .quadrature import (
    IntegralEstimate,
    NonFiniteSampleError,
    QuadSpec,
    QuadratureError,
    integrate_2d,
    integrate_qmc,
    map_semiinfinite,
)
from .empotential import (
    EtaPoint,
    avg_potential_integrand,
    eta,
    eta_asymptote,
    fresnel_te,
    fresnel_tm,
    u_star,
)
from .polarization import (
    ALL_ASSIGNMENTS,
    ModeQuad,
    Pol,
    PolarizationAssignment,
    build_polarization_vectors,
    eps_dot_ab,
    eps_dot_cd,
)
from .variance_single import GammaPoint, gamma_single, integrand_single, variance_single
from .variance_double import DoubleOptions, RHat, gamma_double, integrand_double, rhat_bracket, variance_double
from .kernels import BACKEND

__all__ = [
    "__version__",
    "BACKEND",
    "ModelParams",
    "InternalUnits",
    "UNITS",
    "DilutenessWarning",
    "wick_polarizability",
    "effective_epsilon",
    "QuadSpec",
    "IntegralEstimate",
    "QuadratureError",
    "NonFiniteSampleError",
    "map_semiinfinite",
    "integrate_2d",
    "integrate_qmc",
    "EtaPoint",
    "fresnel_te",
    "fresnel_tm",
    "avg_potential_integrand",
    "u_star",
    "eta",
    "eta_asymptote",
    "Pol",
    "ModeQuad",
    "PolarizationAssignment",
    "ALL_ASSIGNMENTS",
    "eps_dot_ab",
    "eps_dot_cd",
    "build_polarization_vectors",
    "GammaPoint",
    "integrand_single",
    "variance_single",
    "gamma_single",
    "RHat",
    "DoubleOptions",
    "rhat_bracket",
    "integrand_double",
    "variance_double",
    "gamma_double",
]
