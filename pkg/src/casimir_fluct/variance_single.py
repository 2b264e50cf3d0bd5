"""Single-scattering variance of the Casimir-Polder potential.

After the memory-effect delta fixes q_c = q_a - q_b + q_d and one global
azimuth is integrated out (q_d on the x axis), the variance is a 7-D
integral over (xi1, xi2, qa, qb, qd, phi, phi'):

    <dU^2> = n alpha_s^2 * 2pi / (16 (2pi)^8) * int integrand_single

with

    integrand_single = xi1^4 xi2^4 alpha(i xi1) alpha(i xi2)
                       exp(-sum kappa z) / (kappa_a kappa_b kappa_c kappa_d sum kappa)
                       * S_ab * S_cd * qa qb qd,

S_ab = sum over (pa, pb) of (eps_a . eps_b)^2, likewise S_cd.  All constants
live in ``SINGLE_PREFACTOR`` and are applied once, in ``variance_single``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .empotential import EtaPoint, eta, u_star
from .polarization import ModeQuad
from .quadrature import IntegralEstimate, QuadratureError, QuadSpec, integrate_qmc
from .units import ModelParams

__all__ = [
    "GammaPoint",
    "SINGLE_PREFACTOR",
    "single_scales",
    "integrand_single",
    "variance_single_reduced",
    "variance_single",
    "gamma_single",
    "default_spec_single",
]

TWO_PI = 2.0 * math.pi
SINGLE_PREFACTOR = TWO_PI / (16.0 * TWO_PI**8)


@dataclass(frozen=True)
class GammaPoint:
    """Relative fluctuation at one distance, in figure-axis scaling."""

    z_over_lambda: float
    gamma_scaled: float
    stat_error: float
    n_samples: int
    seed: int
    converged: bool = True
    variance_rel_error: float = math.nan
    eta_over_nalphas: float = math.nan


def default_spec_single(**kw) -> QuadSpec:
    base = dict(dim=7, budget=1 << 21, replications=16, target_rel_error=0.02)
    base.update(kw)
    return QuadSpec(**base)


def single_scales(z: float):
    """(mu_xi, mu_q) for the rational maps at internal distance z."""
    return min(1.0, 1.0 / z), 1.0 / z


def _stack(mq: ModeQuad):
    cols = [mq.xi1, mq.xi2, mq.qa, mq.qb, mq.qd, mq.phi, mq.phi_prime]
    return np.column_stack([np.atleast_1d(np.asarray(c, dtype=float)) for c in np.broadcast_arrays(*cols)])


def integrand_single(mq: ModeQuad, params: ModelParams, backend=None):
    """Constant-free single-scattering integrand at the given kinematics.

    Includes the polar measure qa qb qd; integrate against
    dxi1 dxi2 dqa dqb dqd dphi dphi'.
    """
    x = _stack(mq)
    if np.any(x[:, :2] <= 0):
        raise ValueError("xi1 and xi2 must be > 0")
    v = kernels.single_eval(x, params.z, backend=backend)
    if not np.all(np.isfinite(v)):
        k = int(np.argmax(~np.isfinite(v)))
        raise FloatingPointError(f"non-finite integrand at {x[k].tolist()}")
    return float(v[0]) if np.ndim(mq.xi1) == 0 and v.size == 1 else v


def variance_single_reduced(params: ModelParams, spec: QuadSpec | None = None,
                            workers=None, backend=None) -> IntegralEstimate:
    """<dU^2> / (n alpha_s^2), internal units."""
    spec = spec or default_spec_single()
    if spec.dim != 7:
        raise ValueError("single-scattering integral is 7-dimensional")
    z = params.z
    mu_xi, mu_q = single_scales(z)
    impl = kernels.get_backend(backend)

    def f(u):
        v = impl.single_samples(u, z, mu_xi, mu_q)
        if np.any(v < 0):
            k = int(np.argmax(v < 0))
            raise QuadratureError(f"negative single-scattering sample {v[k]!r} at u = {u[k].tolist()}")
        return v

    spec = spec.replace(transform=(("xi", "rational", mu_xi), ("q", "rational", mu_q),
                                   ("phi", "uniform", TWO_PI)))
    return integrate_qmc(f, spec, workers=workers).scaled(SINGLE_PREFACTOR)


def variance_single(params: ModelParams, spec: QuadSpec | None = None,
                    workers=None, backend=None) -> IntegralEstimate:
    """<dU^2> from single scattering, internal units (hbar = c = omega_A = alpha(0) = 1)."""
    if params.n_alpha_s == 0:
        raise ValueError("the variance vanishes for n_alpha_s = 0; use gamma_single for the scaled ratio")
    est = variance_single_reduced(params, spec, workers, backend)
    out = est.scaled(params.n * params.alpha_s**2)
    if not out.value > 0:
        raise QuadratureError(f"non-positive variance estimate {out.value!r}")
    return out


def _first_order_eta(params: ModelParams, eta_point: EtaPoint | None) -> EtaPoint:
    if eta_point is None:
        eta_point = eta(params.replace(n_alpha_s=0.0, eps_bg=1.0), linearized=True, tol=1e-6)
    return eta_point


def gamma_single(params: ModelParams, spec: QuadSpec | None = None, workers=None,
                 backend=None, eta_point: EtaPoint | None = None) -> GammaPoint:
    """gamma * sqrt(n z^3) with gamma = sqrt(<dU^2>) / |U_bar|.

    U_bar is taken to first order in n alpha_s, so the returned number is
    independent of n and of n alpha_s.
    """
    spec = spec or default_spec_single()
    est = variance_single_reduced(params, spec, workers, backend)
    ep = _first_order_eta(params, eta_point)
    z = params.z
    ubar = ep.eta_over_nalphas * abs(u_star(params.z_over_lambda))
    g = math.sqrt(est.value) * z**1.5 / ubar
    rel_v = est.rel_error
    err = g * (0.5 * rel_v + ep.abs_error / ep.eta_over_nalphas)
    return GammaPoint(
        z_over_lambda=params.z_over_lambda,
        gamma_scaled=g,
        stat_error=err,
        n_samples=est.n_total,
        seed=spec.seed,
        converged=est.converged and ep.converged,
        variance_rel_error=rel_v,
        eta_over_nalphas=ep.eta_over_nalphas,
    )
