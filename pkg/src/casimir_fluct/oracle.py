"""Independent reference implementations.

Nothing here calls the production integrands or quadrature engine.  The
average potential is integrated with a tangent map and the trapezoid rule,
using the textbook Fresnel quotients and a central difference in n alpha_s
for the first-order coefficient.  The variance integrands are rebuilt from
explicit polarization 3-vectors (``build_polarization_vectors``) instead of
the closed-form tables, with arbitrary in-plane orientation, and the
single-scattering variance is integrated on a tensor grid (Gauss-Legendre in
the radial variables, periodic trapezoid in the angles) with q_a, not q_d,
fixed on the x axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .polarization import build_polarization_vectors

__all__ = [
    "eta_bruteforce",
    "single_integrand_geometric",
    "double_integrand_geometric",
    "variance_single_bruteforce",
    "BruteForceResult",
    "fit_power_law",
]

TWO_PI = 2.0 * math.pi


# ------------------------------------------------------------------ eta


def _ubar_grid(z, eps_t, grid_n):
    # U_bar / U_star on a tangent-mapped trapezoid grid, textbook Fresnel quotients
    t = np.linspace(0.0, 1.0, grid_n + 1)[:-1]
    w = np.full(t.size, 1.0 / grid_n)
    w[0] *= 0.5
    s_xi, s_q = min(1.0, 1.0 / (2 * z)), 1.0 / (2 * z)
    xi = s_xi * np.tan(0.5 * math.pi * t)
    jx = s_xi * 0.5 * math.pi / np.cos(0.5 * math.pi * t) ** 2
    q = s_q * np.tan(0.5 * math.pi * t)
    jq = s_q * 0.5 * math.pi / np.cos(0.5 * math.pi * t) ** 2
    X, Q = np.meshgrid(xi, q, indexing="ij")
    k = np.sqrt(X * X + Q * Q)
    kt = np.sqrt(eps_t * X * X + Q * Q)
    with np.errstate(under="ignore", invalid="ignore", divide="ignore"):
        r_te = (k - kt) / (k + kt)
        r_tm = (eps_t * k - kt) / (eps_t * k + kt)
        g = (X * X * r_te - (X * X + 2 * Q * Q) * r_tm) * Q * np.exp(-2 * k * z) / (2 * k) / (1 + X * X)
    # the corner xi = q = 0 carries the factor q and contributes nothing
    g = np.nan_to_num(g, nan=0.0)
    ubar = (w * jx) @ g @ (w * jq) / TWO_PI**2
    return ubar / (-3.0 / (32.0 * math.pi**2 * z**4))


def eta_bruteforce(params, grid_n: int = 512, delta: float = 1e-4) -> float:
    """eta/(n alpha_s) on a (grid_n - 1)^2 trapezoid grid.

    With n alpha_s = 0 and eps = 1 this is the first-order coefficient,
    obtained by a central difference of width ``delta``.
    """
    if grid_n < 64:
        raise ValueError("grid_n must be >= 64")
    z = params.z
    d = params.n_alpha_s
    if d == 0 and params.eps_bg == 1.0:
        return (_ubar_grid(z, 1 + delta, grid_n) - _ubar_grid(z, 1 - delta, grid_n)) / (2 * delta)
    eps_t = params.eps_bg * (1 + d)
    val = _ubar_grid(z, eps_t, grid_n)
    return val / d if d > 0 else val


# ------------------------------------------------------- geometric integrands


def _modes(xi1, xi2, qa_vec, qb_vec, qd_vec):
    qa_vec, qb_vec, qd_vec = (np.asarray(v, dtype=float) for v in (qa_vec, qb_vec, qd_vec))
    qc_vec = qa_vec - qb_vec + qd_vec
    out = {}
    for name, vec, xi, direction in (
        ("a", qa_vec, xi1, "incoming"),
        ("b", qb_vec, xi1, "outgoing"),
        ("c", qc_vec, xi2, "incoming"),
        ("d", qd_vec, xi2, "outgoing"),
    ):
        q = np.hypot(vec[0], vec[1])
        kappa = np.sqrt(xi * xi + q * q)
        te, tm = build_polarization_vectors(vec, xi, kappa, direction, ref_azimuth=0.0)
        out[name] = (q, kappa, (te, tm))
    return out


def _dot(u, v):
    return np.sum(u * v, axis=0)


def single_integrand_geometric(xi1, xi2, qa_vec, qb_vec, qd_vec, z):
    """Single-scattering integrand over d^2q_a d^2q_b d^2q_d / (2pi) form.

    Same normalisation as the production integrand divided by qa qb qd:
    xi1^4 xi2^4 alpha1 alpha2 exp(-sum kappa z)/(prod kappa sum kappa)
    * sum (eps_a.eps_b)^2 (eps_c.eps_d)^2.
    """
    m = _modes(xi1, xi2, qa_vec, qb_vec, qd_vec)
    (_, ka, ea), (_, kb, eb), (_, kc, ec), (_, kd, ed) = m["a"], m["b"], m["c"], m["d"]
    sab = sum(np.real(_dot(x, y)) ** 2 for x in ea for y in eb)
    scd = sum(np.real(_dot(x, y)) ** 2 for x in ec for y in ed)
    s = ka + kb + kc + kd
    alpha = 1.0 / ((1 + np.square(xi1)) * (1 + np.square(xi2)))
    return xi1**4 * xi2**4 * alpha * np.exp(-s * z) / (ka * kb * kc * kd * s) * sab * scd


def double_integrand_geometric(xi1, xi2, qa_vec, qb_vec, qd_vec, rhat, z,
                               reading="projected", weights="derived"):
    """Double-scattering integrand with explicit vectors, divided by qa qb qd."""
    m = _modes(xi1, xi2, qa_vec, qb_vec, qd_vec)
    (_, ka, ea), (_, kb, eb), (_, kc, ec), (_, kd, ed) = m["a"], m["b"], m["c"], m["d"]
    rhat = np.asarray(rhat, dtype=float)
    r3 = rhat.reshape(3, *([1] * (np.ndim(ka))))

    def pair(ex, ey, xi):
        tot = 0
        for x in ex:
            for y in ey:
                d = _dot(x, y)
                a = d - _dot(x, r3) * _dot(y, r3)
                tot = tot + (xi**6 * d * d * a if weights == "squared" else xi**6 * d * a)
        return tot

    pab, pcd = pair(ea, eb, xi1), pair(ec, ed, xi2)
    dq = np.asarray(qb_vec, dtype=float) - np.asarray(qd_vec, dtype=float)
    y = rhat[0] * dq[0] + rhat[1] * dq[1]
    if reading == "literal":
        y = y * math.hypot(rhat[0], rhat[1])
    ct = rhat[2]
    s = ka + kb + kc + kd
    den = -1j * y + abs(ct) * s / 2 + ct * (ka + kc - kb - kd) / 2 + xi1 + xi2
    alpha = 1.0 / ((1 + np.square(xi1)) * (1 + np.square(xi2)))
    return alpha * np.exp(-s * z) / (ka * kb * kc * kd * s) * np.real(pab * pcd / den)


# ------------------------------------------------ brute-force 7-D variance


@dataclass(frozen=True)
class BruteForceResult:
    value: float
    error: float
    coarse: float
    n_points: int


def _single_grid(z, n_r, n_a):
    # variance / (n alpha_s^2) on a tensor grid; q_a along x
    x, w = np.polynomial.legendre.leggauss(n_r)
    t, wt = 0.5 * (x + 1), 0.5 * w
    mu_xi, mu_q = min(1.0, 1.0 / z), 1.0 / z

    def radial(mu):
        return mu * t / (1 - t), wt * mu / (1 - t) ** 2
    xis, wxi = radial(mu_xi)
    qs, wq = radial(mu_q)
    ang = TWO_PI * np.arange(n_a) / n_a
    wa = np.full(n_a, TWO_PI / n_a)
    # grid over (qa, qb, qd, theta_b, theta_d)
    QA, QB, QD, TB, TD = np.meshgrid(qs, qs, qs, ang, ang, indexing="ij")
    W5 = np.einsum("i,j,k,l,m->ijklm", wq * qs, wq * qs, wq * qs, wa, wa).ravel()
    qa_vec = np.stack([QA.ravel(), np.zeros(QA.size)])
    qb_vec = np.stack([QB.ravel() * np.cos(TB.ravel()), QB.ravel() * np.sin(TB.ravel())])
    qd_vec = np.stack([QD.ravel() * np.cos(TD.ravel()), QD.ravel() * np.sin(TD.ravel())])
    total = 0.0
    for i, x1 in enumerate(xis):
        for j, x2 in enumerate(xis):
            with np.errstate(under="ignore", invalid="ignore", divide="ignore"):
                f = single_integrand_geometric(x1, x2, qa_vec, qb_vec, qd_vec, z)
            f = np.where(np.isfinite(f), f, 0.0)
            total += wxi[i] * wxi[j] * float(f @ W5)
    # global azimuth 2pi and the constant 1/(16 (2pi)^8)
    return total * TWO_PI / (16.0 * TWO_PI**8)


def variance_single_bruteforce(params, grid_n: int = 10, n_angles: int | None = None) -> BruteForceResult:
    """<dU^2>/(n alpha_s^2) on a nested product grid.

    ``grid_n`` Gauss-Legendre nodes per radial variable and ``n_angles``
    (default ``grid_n + 2``) trapezoid nodes per angle.  The error is the
    difference to the run with two fewer nodes in every direction.
    """
    if not 4 <= grid_n <= 12:
        raise ValueError("grid_n must lie in [4, 12]")
    n_a = n_angles or grid_n + 2
    fine = _single_grid(params.z, grid_n, n_a)
    coarse = _single_grid(params.z, grid_n - 2, n_a - 2)
    return BruteForceResult(fine, abs(fine - coarse), coarse, grid_n**5 * n_a**2)


# ----------------------------------------------------------- power laws


def fit_power_law(points):
    """Least-squares line through (log z, log value).

    Returns (exponent, prefactor, r_squared).
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (z, value) pairs")
    if len(pts) < 4:
        raise ValueError("need at least 4 points")
    if np.any(pts <= 0):
        raise ValueError("power-law fit needs positive z and values")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if lx.max() - lx.min() < math.log(10) * (1 - 1e-12):
        raise ValueError("points must span at least one decade")
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(math.exp(icpt)), float(r2)
