"""Average Casimir-Polder potential above the effective medium and the
reduction factor eta = U_bar / U_star.

The frequency integral is taken on the imaginary axis.  With
kappa = sqrt(xi^2 + q^2) the average potential reads

    U_bar = (1/2pi) int_0^inf dxi int_0^inf dq  avg_potential_integrand(xi, q)

and the perfect-mirror reference is U_star = -3 / (32 pi^2 z^4) in internal
units.  Both Fresnel coefficients are written with the contrast (eps - 1)
factored out, so nothing cancels when eps_tilde -> 1 and the combination
xi^2 r_TE - (xi^2 + 2 q^2) r_TM stays finite at xi = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import IntegralEstimate, QuadSpec, QuadratureError, integrate_2d, map_semiinfinite
from .units import ModelParams, effective_epsilon, wick_polarizability

__all__ = [
    "EtaPoint",
    "fresnel_te",
    "fresnel_tm",
    "avg_potential_integrand",
    "u_star",
    "eta",
    "eta_asymptote",
    "EtaConvergenceError",
    "ETA_LONG",
    "ETA_SHORT_SLOPE",
]

ETA_LONG = 23.0 / 60.0
ETA_SHORT_SLOPE = math.pi**2 / 3.0
TWO_PI = 2.0 * math.pi


class EtaConvergenceError(QuadratureError):
    """The eta quadrature missed its tolerance; ``estimate`` holds what was reached."""

    def __init__(self, msg, estimate):
        super().__init__(msg)
        self.estimate = estimate


@dataclass(frozen=True)
class EtaPoint:
    z_over_lambda: float
    eta_over_nalphas: float
    abs_error: float
    eta: float = math.nan
    converged: bool = True


def _check_args(xi, q, eps_tilde):
    xi = np.asarray(xi, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(xi < 0) or np.any(q < 0):
        raise ValueError("xi and q must be >= 0")
    if np.any((xi == 0) & (q == 0)):
        raise ValueError("xi = q = 0 is outside the domain (kappa = 0)")
    if not eps_tilde >= 1:
        raise ValueError(f"eps_tilde must be >= 1, got {eps_tilde}")
    return xi, q


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def fresnel_te(xi, q, eps_tilde):
    """TE reflection coefficient (kappa - kappa~)/(kappa + kappa~) at omega = i xi."""
    xi, q = _check_args(xi, q, eps_tilde)
    k = np.sqrt(xi * xi + q * q)
    kt = np.sqrt(eps_tilde * xi * xi + q * q)
    return _out(-(eps_tilde - 1.0) * xi * xi / (k + kt) ** 2)


def fresnel_tm(xi, q, eps_tilde):
    """TM reflection coefficient (eps kappa - kappa~)/(eps kappa + kappa~) at omega = i xi."""
    xi, q = _check_args(xi, q, eps_tilde)
    x2, q2 = xi * xi, q * q
    k = np.sqrt(x2 + q2)
    kt = np.sqrt(eps_tilde * x2 + q2)
    num = (eps_tilde - 1.0) * (eps_tilde * x2 + (eps_tilde + 1.0) * q2)
    return _out(num / (eps_tilde * k + kt) ** 2)


def _xi2_bracket(xi, q, eps_tilde):
    # xi^2 [r_TE - (1 + 2 q^2/xi^2) r_TM]
    return xi * xi * fresnel_te(xi, q, eps_tilde) - (xi * xi + 2 * q * q) * fresnel_tm(xi, q, eps_tilde)


def _xi2_bracket_linear(xi, q):
    # first-order coefficient of _xi2_bracket in (eps_tilde - 1)
    x2, q2 = xi * xi, q * q
    return -(x2 * x2 + (x2 + 2 * q2) ** 2) / (4 * (x2 + q2))


def avg_potential_integrand(xi, q, params: ModelParams):
    """Integrand of U_bar in (xi, q) after the azimuthal integration.

    xi^2 alpha(i xi) q/(2pi) exp(-2 kappa z)/(2 kappa) [r_TE - (1 + 2q^2/xi^2) r_TM];
    U_bar is (1/2pi) times its integral over the positive quadrant.
    """
    eps_t = effective_epsilon(params)
    xi, q = _check_args(xi, q, eps_t)
    k = np.sqrt(xi * xi + q * q)
    with np.errstate(under="ignore"):
        val = (wick_polarizability(xi) * q / TWO_PI * np.exp(-2 * k * params.z) / (2 * k)
               * _xi2_bracket(xi, q, eps_t))
    if not np.all(np.isfinite(val)):
        bad = np.argwhere(~np.isfinite(np.atleast_1d(val)))[0][0]
        raise FloatingPointError(
            f"non-finite integrand at xi={np.atleast_1d(xi)[bad]!r}, q={np.atleast_1d(q)[bad]!r}"
        )
    return _out(val)


def u_star(z_over_lambda: float) -> float:
    """Long-distance perfect-mirror potential -3/(32 pi^2 z^4), internal units."""
    z = z_over_lambda * TWO_PI
    return -3.0 / (32.0 * math.pi**2 * z**4)


def _eta_integral(params: ModelParams, linearized: bool, tol: float, max_sweeps: int) -> IntegralEstimate:
    z = params.z
    mu_q = 1.0 / (2 * z)
    mu_xi = min(1.0, 1.0 / (2 * z))
    us = u_star(params.z_over_lambda)
    eps_t = effective_epsilon(params)

    def f(t1, t2):
        xi, jx = map_semiinfinite(t1, mu_xi)
        q, jq = map_semiinfinite(t2, mu_q)
        k = np.sqrt(xi * xi + q * q)
        br = _xi2_bracket_linear(xi, q) if linearized else _xi2_bracket(xi, q, eps_t)
        with np.errstate(under="ignore"):
            val = (1.0 / (1.0 + xi * xi)) * q / TWO_PI * np.exp(-2 * k * z) / (2 * k) * br
        return val * jx * jq / (TWO_PI * us)

    spec = QuadSpec(
        dim=2,
        target_rel_error=1e-7,
        abs_tol=tol,
        max_sweeps=max_sweeps,
        transform=(("xi", "rational", mu_xi), ("q", "rational", mu_q)),
    )
    return integrate_2d(f, spec)


def eta(params: ModelParams, tol: float = 1e-4, linearized: bool | None = None,
        max_sweeps: int = 60, strict: bool = False) -> EtaPoint:
    """Reduction factor eta = U_bar/U_star at ``params.z_over_lambda``.

    Parameters
    ----------
    tol : float
        Absolute tolerance on eta/(n alpha_s) (on eta itself for the full
        nonlinear evaluation).
    linearized : bool, optional
        Use the reflection coefficients to first order in n alpha_s.  The
        default is the first-order form whenever the reflector is a pure
        effective medium over vacuum (eps_bg = 1), which is the n alpha_s -> 0
        normalisation; otherwise the full Fresnel coefficients are used.
    strict : bool
        Raise ``EtaConvergenceError`` instead of returning a flagged point.

    Returns
    -------
    EtaPoint
        ``eta_over_nalphas`` is eta/(n alpha_s), or the first-order
        coefficient when linearized.  It is NaN if n alpha_s = 0 and the
        full form was requested.
    """
    if linearized is None:
        linearized = params.eps_bg == 1.0
    if linearized and params.eps_bg != 1.0:
        raise ValueError("the first-order form assumes eps_bg = 1")
    d = params.n_alpha_s
    if linearized:
        est = _eta_integral(params, True, tol, max_sweeps)
        ratio, err = est.value, est.std_error
        eta_val = ratio * d
    else:
        # tolerance is on eta/(n alpha_s) when that ratio is meaningful
        t = tol * d if d > 0 and params.eps_bg == 1.0 else tol
        est = _eta_integral(params, False, t, max_sweeps)
        eta_val = est.value
        if d > 0:
            ratio, err = eta_val / d, est.std_error / d
        else:
            ratio, err = math.nan, est.std_error
    pt = EtaPoint(params.z_over_lambda, ratio, err, eta_val, est.converged)
    if strict and not est.converged:
        raise EtaConvergenceError(
            f"eta quadrature at z/lambda={params.z_over_lambda} reached error {est.std_error:.3g} "
            f"> tol {tol:.3g}", pt
        )
    return pt


def eta_asymptote(z_over_lambda: float, regime: str) -> float:
    """eta/(n alpha_s) in the 'short' (pi^2/3 z/lambda) or 'long' (23/60) regime."""
    if regime == "long":
        return ETA_LONG
    if regime == "short":
        if z_over_lambda < 0:
            raise ValueError("z_over_lambda must be >= 0")
        return ETA_SHORT_SLOPE * z_over_lambda
    raise ValueError(f"regime must be 'short' or 'long', got {regime!r}")
