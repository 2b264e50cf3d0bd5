"""Double-scattering contribution to the potential variance.

Adds an average over the direction r_hat = (sin t cos psi, sin t sin psi, cos t)
of the separation between the two scatterers to the 7-D kinematics of the
single-scattering term.  Per mode pair the polarization weight is

    P_ab = sum_{pa,pb} xi1^6 (eps_a.eps_b) [eps_a.eps_b - (eps_a.r)(eps_b.r)]

and the integrand is

    alpha1 alpha2 exp(-sum kappa z) / (kappa_a kappa_b kappa_c kappa_d sum kappa)
    * Re{P_ab P_cd / D} * qa qb qd,

    D = -i y + |cos t| sum kappa / 2 + cos t (kappa_a + kappa_c - kappa_b - kappa_d) / 2 + xi1 + xi2,

with y = sin t (cos psi, sin psi).(q_b - q_d) for the 'projected' reading of
the in-plane phase and y = sin^2 t (...) for the 'literal' one.

Weight conventions (``weights``):

``derived``  single power of eps_a.eps_b as above, and a normalisation of
             1/(16 pi^2) per diagram with the ladder and the crossed diagram
             summed, so <dU2^2> = n^2 alpha_s^4 2pi/(16 (2pi)^8) * 2/(16 pi^2) * int.
``squared``  (eps_a.eps_b)^2 (eps_c.eps_d)^2 outer weights and
             <dU2^2> = n^2 alpha_s^4 2pi/(16 (2pi)^8) * 1/(2 pi) * int.

``coherent_factor`` multiplies either normalisation and is recorded in run
manifests; it defaults to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .empotential import EtaPoint, u_star
from .polarization import ModeQuad
from .quadrature import IntegralEstimate, QuadSpec, integrate_qmc
from .units import ModelParams
from .variance_single import SINGLE_PREFACTOR, GammaPoint, _first_order_eta, _stack

__all__ = [
    "RHat",
    "DoubleOptions",
    "rhat_bracket",
    "integrand_double",
    "variance_double_reduced",
    "variance_double",
    "gamma_double",
    "double_scales",
    "default_spec_double",
    "DOUBLE_NORMALISATION",
]

TWO_PI = 2.0 * math.pi
DOUBLE_NORMALISATION = {
    "derived": 2.0 / (16.0 * math.pi**2),
    "squared": 1.0 / TWO_PI,
}


@dataclass(frozen=True)
class RHat:
    cos_theta: float
    psi: float

    def __post_init__(self):
        if not -1.0 <= self.cos_theta <= 1.0:
            raise ValueError("cos_theta must lie in [-1, 1]")

    @property
    def sin_theta(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.cos_theta**2))

    @property
    def vector(self) -> np.ndarray:
        st = self.sin_theta
        return np.array([st * math.cos(self.psi), st * math.sin(self.psi), self.cos_theta])


@dataclass(frozen=True)
class DoubleOptions:
    """Notation switches, recorded in run manifests."""

    reading: str = "projected"
    weights: str = "derived"
    coherent_factor: float = 1.0

    def __post_init__(self):
        if self.reading not in kernels.READINGS:
            raise ValueError(f"reading must be one of {sorted(kernels.READINGS)}")
        if self.weights not in kernels.WEIGHTS:
            raise ValueError(f"weights must be one of {sorted(kernels.WEIGHTS)}")
        if not self.coherent_factor > 0:
            raise ValueError("coherent_factor must be > 0")

    @property
    def prefactor(self) -> float:
        return SINGLE_PREFACTOR * DOUBLE_NORMALISATION[self.weights] * self.coherent_factor

    def as_dict(self) -> dict:
        return {"reading": self.reading, "weights": self.weights, "coherent_factor": self.coherent_factor}


def default_spec_double(**kw) -> QuadSpec:
    base = dict(dim=9, budget=1 << 20, replications=16, target_rel_error=0.05)
    base.update(kw)
    return QuadSpec(**base)


def double_scales(z: float):
    """(mu_xi, mu_q): both follow c/z, the frequency scale picked by the weights."""
    return 1.0 / z, 1.0 / z


def rhat_bracket(mq: ModeQuad, rhat: RHat, reading: str = "projected") -> complex:
    """Inverse of the propagation bracket D."""
    if reading not in kernels.READINGS:
        raise ValueError(f"reading must be one of {sorted(kernels.READINGS)}")
    ct, st = rhat.cos_theta, rhat.sin_theta
    cp, sp = math.cos(rhat.psi), math.sin(rhat.psi)
    dqx = mq.qb * math.cos(mq.phi) - mq.qd
    dqy = mq.qb * math.sin(mq.phi)
    y = st * (cp * dqx + sp * dqy)
    if reading == "literal":
        y *= st
    ka, kb, kc, kd = mq.kappa_a, mq.kappa_b, mq.kappa_c, mq.kappa_d
    den = (-1j * y + abs(ct) * (ka + kb + kc + kd) / 2 + ct * (ka + kc - kb - kd) / 2
           + mq.xi1 + mq.xi2)
    if abs(den) < 1e-30:
        raise ZeroDivisionError("propagation bracket vanishes")
    return 1.0 / den


def integrand_double(mq: ModeQuad, rhat: RHat, params: ModelParams,
                     options: DoubleOptions | None = None, backend=None):
    """Constant-free double-scattering integrand (includes qa qb qd).

    Integrate against dxi1 dxi2 dqa dqb dqd dphi dphi' dcos_theta dpsi.
    """
    options = options or DoubleOptions()
    base = _stack(mq)
    n = len(base)
    x = np.column_stack([base, np.full(n, rhat.cos_theta), np.full(n, rhat.psi)])
    if np.any(x[:, :2] <= 0):
        raise ValueError("xi1 and xi2 must be > 0")
    v = kernels.double_eval(x, params.z, kernels.READINGS[options.reading],
                            kernels.WEIGHTS[options.weights], backend=backend)
    if not np.all(np.isfinite(v)):
        k = int(np.argmax(~np.isfinite(v)))
        raise FloatingPointError(f"non-finite integrand at {x[k].tolist()}")
    return float(v[0]) if n == 1 and np.ndim(mq.xi1) == 0 else v


def variance_double_reduced(params: ModelParams, spec: QuadSpec | None = None,
                            options: DoubleOptions | None = None, workers=None,
                            backend=None) -> IntegralEstimate:
    """<dU2^2> / (n^2 alpha_s^4), internal units."""
    spec = spec or default_spec_double()
    options = options or DoubleOptions()
    if spec.dim != 9:
        raise ValueError("double-scattering integral is 9-dimensional")
    z = params.z
    mu_xi, mu_q = double_scales(z)
    impl = kernels.get_backend(backend)
    rd, wt = kernels.READINGS[options.reading], kernels.WEIGHTS[options.weights]

    def f(u):
        return impl.double_samples(u, z, mu_xi, mu_q, rd, wt)

    spec = spec.replace(transform=(("xi", "rational", mu_xi), ("q", "rational", mu_q),
                                   ("phi", "uniform", TWO_PI), ("cos_theta", "uniform", 2.0),
                                   ("psi", "uniform", TWO_PI)))
    return integrate_qmc(f, spec, workers=workers).scaled(options.prefactor)


def variance_double(params: ModelParams, spec: QuadSpec | None = None,
                    options: DoubleOptions | None = None, workers=None,
                    backend=None) -> IntegralEstimate:
    """<dU2^2>, internal units."""
    est = variance_double_reduced(params, spec, options, workers, backend)
    return est.scaled((params.n * params.alpha_s**2) ** 2)


def gamma_double(params: ModelParams, spec: QuadSpec | None = None,
                 options: DoubleOptions | None = None, workers=None, backend=None,
                 eta_point: EtaPoint | None = None) -> GammaPoint:
    """gamma_2 * n lambda_A^3 / (n alpha_s), with gamma_2 = sqrt(<dU2^2>) / |U_bar|.

    Multiply by (z/lambda)^3 for the long-distance scaling and by
    (z/lambda)^2 for the short-distance one.  A non-positive variance
    estimate gives NaN and an unconverged point.
    """
    spec = spec or default_spec_double()
    est = variance_double_reduced(params, spec, options, workers, backend)
    ep = _first_order_eta(params, eta_point)
    ubar = ep.eta_over_nalphas * abs(u_star(params.z_over_lambda))
    positive = est.value > 3 * est.std_error
    if est.value > 0:
        g = TWO_PI**3 * math.sqrt(est.value) / ubar
        err = g * (0.5 * est.rel_error + ep.abs_error / ep.eta_over_nalphas)
    else:
        g, err = math.nan, math.nan
    return GammaPoint(
        z_over_lambda=params.z_over_lambda,
        gamma_scaled=g,
        stat_error=err,
        n_samples=est.n_total,
        seed=spec.seed,
        converged=est.converged and ep.converged and positive,
        variance_rel_error=est.rel_error,
        eta_over_nalphas=ep.eta_over_nalphas,
    )
