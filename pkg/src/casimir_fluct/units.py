"""Physical parameter set and internal unit convention.

Internally c = hbar = omega_A = alpha(0) = 1, so the resonance wavelength is
lambda_A = 2*pi.  Every observable exported by the package (eta, gamma,
gamma_2 and their scaled forms) is a dimensionless ratio, so no conversion
layer is needed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InternalUnits",
    "UNITS",
    "ModelParams",
    "DilutenessWarning",
    "wick_polarizability",
    "effective_epsilon",
]

DILUTE_LIMIT = 0.1


class DilutenessWarning(UserWarning):
    """Raised (as a warning) when n*alpha_s leaves the dilute regime."""


@dataclass(frozen=True)
class InternalUnits:
    c: float = 1.0
    hbar: float = 1.0
    omega_A: float = 1.0
    alpha0: float = 1.0

    @property
    def lambda_A(self) -> float:
        return 2.0 * math.pi * self.c / self.omega_A


UNITS = InternalUnits()


@dataclass(frozen=True)
class ModelParams:
    """Inputs of the model, in dimensionless form.

    Parameters
    ----------
    z_over_lambda : float
        Atom-surface distance in units of the resonance wavelength.
    n_alpha_s : float
        Disorder strength n*alpha_s.  ``0`` selects the first-order
        (n*alpha_s -> 0) normalisation wherever a ratio per n*alpha_s is
        requested.
    n_lambdaA3 : float
        Number of scatterers per cubic resonance wavelength.
    eps_bg : float
        Background relative permittivity (>= 1).
    alpha0, omega_A : float
        Static polarizability and resonance frequency.  Both are the internal
        units and must equal 1.
    """

    z_over_lambda: float
    n_alpha_s: float = 0.0
    n_lambdaA3: float = 1.0
    eps_bg: float = 1.0
    alpha0: float = 1.0
    omega_A: float = 1.0
    dilute_warning: bool = field(init=False, default=False)

    def __post_init__(self):
        if not self.z_over_lambda > 0 or not math.isfinite(self.z_over_lambda):
            raise ValueError(f"z_over_lambda must be > 0, got {self.z_over_lambda}")
        if not self.n_alpha_s >= 0:
            raise ValueError(f"n_alpha_s must be >= 0, got {self.n_alpha_s}")
        if not self.n_lambdaA3 > 0:
            raise ValueError(f"n_lambdaA3 must be > 0, got {self.n_lambdaA3}")
        if not self.eps_bg >= 1:
            raise ValueError(f"eps_bg must be >= 1, got {self.eps_bg}")
        if self.alpha0 != 1.0 or self.omega_A != 1.0:
            raise ValueError("alpha0 and omega_A define the internal units and must be 1")
        if self.n_alpha_s >= DILUTE_LIMIT:
            object.__setattr__(self, "dilute_warning", True)
            warnings.warn(
                f"n_alpha_s = {self.n_alpha_s} is outside the dilute regime (< {DILUTE_LIMIT})",
                DilutenessWarning,
                stacklevel=2,
            )

    @property
    def lambda_A(self) -> float:
        return UNITS.lambda_A

    @property
    def z(self) -> float:
        """Distance in internal units (c / omega_A)."""
        return self.z_over_lambda * UNITS.lambda_A

    @property
    def n(self) -> float:
        """Scatterer density in internal units."""
        return self.n_lambdaA3 / UNITS.lambda_A**3

    @property
    def alpha_s(self) -> float:
        return self.n_alpha_s / self.n

    def replace(self, **changes) -> "ModelParams":
        kw = {
            "z_over_lambda": self.z_over_lambda,
            "n_alpha_s": self.n_alpha_s,
            "n_lambdaA3": self.n_lambdaA3,
            "eps_bg": self.eps_bg,
        }
        kw.update(changes)
        return ModelParams(**kw)

    def as_dict(self) -> dict:
        return {
            "z_over_lambda": self.z_over_lambda,
            "n_alpha_s": self.n_alpha_s,
            "n_lambdaA3": self.n_lambdaA3,
            "eps_bg": self.eps_bg,
            "alpha0": self.alpha0,
            "omega_A": self.omega_A,
        }


def wick_polarizability(xi, params: ModelParams | None = None):
    """Atomic polarizability on the imaginary axis, alpha(i xi).

    Two-level model alpha(omega) = alpha0 omega_A^2 / (omega_A^2 - omega^2)
    evaluated at omega = i xi.  Accepts scalars or arrays.
    """
    alpha0 = UNITS.alpha0 if params is None else params.alpha0
    omega_A = UNITS.omega_A if params is None else params.omega_A
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("imaginary frequency xi must be >= 0")
    out = alpha0 * omega_A**2 / (omega_A**2 + x * x)
    return float(out) if out.ndim == 0 else out


def effective_epsilon(params: ModelParams) -> float:
    """Effective-medium permittivity eps * (1 + n alpha_s)."""
    return params.eps_bg * (1.0 + params.n_alpha_s)
