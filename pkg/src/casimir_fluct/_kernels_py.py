"""Numpy implementation of the variance integrands (fallback backend).

Coordinates, in this order:
single  x = (xi1, xi2, qa, qb, qd, phi, phi_prime)
double  x = (xi1, xi2, qa, qb, qd, phi, phi_prime, cos_theta, psi)

``*_eval`` takes physical coordinates; ``*_samples`` takes points of the unit
cube, applies v = mu t/(1-t) to the radial variables and uniform maps to the
angles, and multiplies by the Jacobian.  No physical constants are applied
here.  Samples whose exponential factor underflows (sum kappa * z > 700)
contribute exactly zero.
"""
import numpy as np

TWO_PI = 2.0 * np.pi
EXP_CUTOFF = 700.0

READINGS = {"projected": 0, "literal": 1}
WEIGHTS = {"derived": 0, "squared": 1}


def _kin(x):
    xi1, xi2, qa, qb, qd, phi, php = (x[:, k] for k in range(7))
    cx = qa * np.cos(php) - qb * np.cos(phi) + qd
    cy = qa * np.sin(php) - qb * np.sin(phi)
    qc = np.hypot(cx, cy)
    safe = np.where(qc > 0, qc, 1.0)
    cos_c = np.where(qc > 0, cx / safe, 1.0)
    sin_c = np.where(qc > 0, cy / safe, 0.0)
    ka = np.sqrt(xi1 * xi1 + qa * qa)
    kb = np.sqrt(xi1 * xi1 + qb * qb)
    kc = np.sqrt(xi2 * xi2 + qc * qc)
    kd = np.sqrt(xi2 * xi2 + qd * qd)
    return xi1, xi2, qa, qb, qc, qd, phi, php, cos_c, sin_c, ka, kb, kc, kd


def _pol_sum_sq(xi, kx, ky, qx, qy, c, s):
    # xi^4 * sum over polarizations of (eps_x . eps_y)^2
    x2 = xi * xi
    return x2 * x2 * c * c + x2 * (kx * kx + ky * ky) * s * s + (qx * qy + kx * ky * c) ** 2


def single_eval(x, z):
    x = np.asarray(x, dtype=float)
    xi1, xi2, qa, qb, qc, qd, phi, php, cos_c, sin_c, ka, kb, kc, kd = _kin(x)
    d = php - phi
    sab = _pol_sum_sq(xi1, ka, kb, qa, qb, np.cos(d), np.sin(d))
    scd = _pol_sum_sq(xi2, kc, kd, qc, qd, cos_c, sin_c)
    s = ka + kb + kc + kd
    ok = (s * z < EXP_CUTOFF) & (ka * kb * kc * kd > 0)
    s = np.where(ok, s, 1.0)
    with np.errstate(under="ignore"):
        w = np.exp(-s * z) / (ka * kb * kc * kd * s)
    w = w / ((1.0 + xi1 * xi1) * (1.0 + xi2 * xi2))
    return np.where(ok, w * sab * scd * qa * qb * qd, 0.0)


def _projections(st, ct, psi, ang_cos, ang_sin, kappa, q, sgn):
    # (TE . r_hat, xi TM . r_hat) for a mode with azimuth given by cos/sin
    cp, sp = np.cos(psi), np.sin(psi)
    sin_rel = sp * ang_cos - cp * ang_sin
    cos_rel = cp * ang_cos + sp * ang_sin
    return st * sin_rel, sgn * kappa * st * cos_rel + 1j * q * ct


def _pair_weight(xi, kx, ky, qx, qy, c, s, ex, ey, squared):
    # sum over the four polarization pairs of the scattering weight, with
    # scaled products dt = xi^m eps.eps and et = xi^m eps.r_hat
    dts = ((c, ky * s), (kx * s, -(kx * ky * c + qx * qy)))
    tot = 0.0
    for i in range(2):
        for j in range(2):
            m = i + j
            dt = dts[i][j]
            a = dt - ex[i] * ey[j]
            if squared:
                tot = tot + xi ** (6 - 3 * m) * dt * dt * a
            else:
                tot = tot + xi ** (6 - 2 * m) * dt * a
    return tot


def double_eval(x, z, reading=0, weights=0):
    x = np.asarray(x, dtype=float)
    xi1, xi2, qa, qb, qc, qd, phi, php, cos_c, sin_c, ka, kb, kc, kd = _kin(x)
    ct, psi = x[:, 7], x[:, 8]
    st = np.sqrt(np.maximum(1.0 - ct * ct, 0.0))
    one, zero = np.ones_like(ct), np.zeros_like(ct)
    ea = _projections(st, ct, psi, np.cos(php), np.sin(php), ka, qa, 1.0)
    eb = _projections(st, ct, psi, np.cos(phi), np.sin(phi), kb, qb, -1.0)
    ec = _projections(st, ct, psi, cos_c, sin_c, kc, qc, 1.0)
    ed = _projections(st, ct, psi, one, zero, kd, qd, -1.0)
    d = php - phi
    pab = _pair_weight(xi1, ka, kb, qa, qb, np.cos(d), np.sin(d), ea, eb, weights)
    pcd = _pair_weight(xi2, kc, kd, qc, qd, cos_c, sin_c, ec, ed, weights)
    y = st * (np.cos(psi) * (qb * np.cos(phi) - qd) + np.sin(psi) * qb * np.sin(phi))
    if reading:
        y = y * st
    s = ka + kb + kc + kd
    den = -1j * y + np.abs(ct) * s / 2 + ct * (ka + kc - kb - kd) / 2 + xi1 + xi2
    ok = (s * z < EXP_CUTOFF) & (ka * kb * kc * kd > 0) & (xi1 > 0) & (xi2 > 0)
    s = np.where(ok, s, 1.0)
    den = np.where(ok, den, 1.0)
    with np.errstate(under="ignore"):
        w = np.exp(-s * z) / (ka * kb * kc * kd * s)
    w = w / ((1.0 + xi1 * xi1) * (1.0 + xi2 * xi2))
    val = w * np.real(pab * pcd / den) * qa * qb * qd
    return np.where(ok, val, 0.0)


def _map(u, z, mu_xi, mu_q, dim):
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[1] != dim:
        raise ValueError(f"expected an (N, {dim}) array")
    x = np.empty_like(u)
    jac = np.ones(len(u))
    for k, mu in enumerate((mu_xi, mu_xi, mu_q, mu_q, mu_q)):
        t = u[:, k]
        s = 1.0 - t
        x[:, k] = mu * t / s
        jac *= mu / (s * s)
    x[:, 5] = TWO_PI * u[:, 5]
    x[:, 6] = TWO_PI * u[:, 6]
    jac *= TWO_PI * TWO_PI
    if dim == 9:
        x[:, 7] = 2.0 * u[:, 7] - 1.0
        x[:, 8] = TWO_PI * u[:, 8]
        jac *= 2.0 * TWO_PI
    return x, jac


def single_samples(u, z, mu_xi, mu_q):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        x, jac = _map(u, z, mu_xi, mu_q, 7)
        v = single_eval(x, z) * jac
    return np.where(np.isfinite(jac), v, 0.0)


def double_samples(u, z, mu_xi, mu_q, reading=0, weights=0):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        x, jac = _map(u, z, mu_xi, mu_q, 9)
        v = double_eval(x, z, reading, weights) * jac
    return np.where(np.isfinite(jac), v, 0.0)
