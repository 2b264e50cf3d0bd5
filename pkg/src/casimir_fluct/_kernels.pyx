# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled variance integrands.  Same contract as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, cos, sin, fabs, hypot, M_PI

cnp.import_array()

cdef double TWO_PI = 2.0 * M_PI
cdef double EXP_CUTOFF = 700.0


cdef struct Kin:
    double xi1, xi2, qa, qb, qc, qd, phi, php, cos_c, sin_c, ka, kb, kc, kd


cdef inline void _kin(double xi1, double xi2, double qa, double qb, double qd,
                      double phi, double php, Kin* k) noexcept nogil:
    cdef double cx = qa * cos(php) - qb * cos(phi) + qd
    cdef double cy = qa * sin(php) - qb * sin(phi)
    cdef double qc = hypot(cx, cy)
    k.xi1 = xi1
    k.xi2 = xi2
    k.qa = qa
    k.qb = qb
    k.qc = qc
    k.qd = qd
    k.phi = phi
    k.php = php
    if qc > 0:
        k.cos_c = cx / qc
        k.sin_c = cy / qc
    else:
        k.cos_c = 1.0
        k.sin_c = 0.0
    k.ka = sqrt(xi1 * xi1 + qa * qa)
    k.kb = sqrt(xi1 * xi1 + qb * qb)
    k.kc = sqrt(xi2 * xi2 + qc * qc)
    k.kd = sqrt(xi2 * xi2 + qd * qd)


cdef inline double _pol_sum_sq(double xi, double kx, double ky, double qx, double qy,
                               double c, double s) noexcept nogil:
    cdef double x2 = xi * xi
    cdef double t = qx * qy + kx * ky * c
    return x2 * x2 * c * c + x2 * (kx * kx + ky * ky) * s * s + t * t


cdef inline double _single_point(Kin* k, double z) noexcept nogil:
    cdef double s = k.ka + k.kb + k.kc + k.kd
    if not (k.ka * k.kb * k.kc * k.kd > 0) or s * z >= EXP_CUTOFF:
        return 0.0
    cdef double d = k.php - k.phi
    cdef double sab = _pol_sum_sq(k.xi1, k.ka, k.kb, k.qa, k.qb, cos(d), sin(d))
    cdef double scd = _pol_sum_sq(k.xi2, k.kc, k.kd, k.qc, k.qd, k.cos_c, k.sin_c)
    cdef double w = exp(-s * z) / (k.ka * k.kb * k.kc * k.kd * s)
    w = w / ((1.0 + k.xi1 * k.xi1) * (1.0 + k.xi2 * k.xi2))
    return w * sab * scd * k.qa * k.qb * k.qd


cdef inline double _xpow(double x, int n) noexcept nogil:
    cdef double r = 1.0
    cdef int i
    for i in range(n):
        r *= x
    return r


cdef inline double fmax0(double x) noexcept nogil:
    return x if x > 0 else 0.0


cdef inline double complex _pair_weight(double xi, double kx, double ky, double qx, double qy,
                                        double c, double s,
                                        double complex ex0, double complex ex1,
                                        double complex ey0, double complex ey1,
                                        int squared) noexcept nogil:
    # scaled products dt = xi^m eps.eps, ex/ey = xi^m eps.r_hat
    cdef double dt[2][2]
    cdef double complex ex[2]
    cdef double complex ey[2]
    cdef double complex tot = 0
    cdef double complex a
    cdef int i, j, m
    dt[0][0] = c
    dt[0][1] = ky * s
    dt[1][0] = kx * s
    dt[1][1] = -(kx * ky * c + qx * qy)
    ex[0] = ex0
    ex[1] = ex1
    ey[0] = ey0
    ey[1] = ey1
    for i in range(2):
        for j in range(2):
            m = i + j
            a = dt[i][j] - ex[i] * ey[j]
            if squared:
                tot = tot + _xpow(xi, 6 - 3 * m) * dt[i][j] * dt[i][j] * a
            else:
                tot = tot + _xpow(xi, 6 - 2 * m) * dt[i][j] * a
    return tot


cdef inline double _double_point(Kin* k, double ct, double psi, double z,
                                 int reading, int squared) noexcept nogil:
    cdef double s = k.ka + k.kb + k.kc + k.kd
    if not (s * z < EXP_CUTOFF) or not (k.ka * k.kb * k.kc * k.kd > 0) \
            or not (k.xi1 > 0) or not (k.xi2 > 0):
        # xi = 0 carries a vanishing weight; NaN kinematics fail the first test
        return 0.0
    cdef double st = sqrt(fmax0(1.0 - ct * ct))
    cdef double cp = cos(psi), sp = sin(psi)
    cdef double ca = cos(k.php), sa = sin(k.php)
    cdef double cb = cos(k.phi), sb = sin(k.phi)
    cdef double complex ea0, ea1, eb0, eb1, ec0, ec1, ed0, ed1
    # TE.r = st sin(psi - phi_i); xi TM.r = s kappa st cos(psi - phi_i) + i q ct
    ea0 = st * (sp * ca - cp * sa)
    ea1 = k.ka * st * (cp * ca + sp * sa) + 1j * k.qa * ct
    eb0 = st * (sp * cb - cp * sb)
    eb1 = -k.kb * st * (cp * cb + sp * sb) + 1j * k.qb * ct
    ec0 = st * (sp * k.cos_c - cp * k.sin_c)
    ec1 = k.kc * st * (cp * k.cos_c + sp * k.sin_c) + 1j * k.qc * ct
    ed0 = st * sp
    ed1 = -k.kd * st * cp + 1j * k.qd * ct
    cdef double d = k.php - k.phi
    cdef double complex pab = _pair_weight(k.xi1, k.ka, k.kb, k.qa, k.qb, cos(d), sin(d),
                                           ea0, ea1, eb0, eb1, squared)
    cdef double complex pcd = _pair_weight(k.xi2, k.kc, k.kd, k.qc, k.qd, k.cos_c, k.sin_c,
                                           ec0, ec1, ed0, ed1, squared)
    cdef double y = st * (cp * (k.qb * cb - k.qd) + sp * k.qb * sb)
    if reading:
        y = y * st
    cdef double complex den = -1j * y + (fabs(ct) * s + ct * (k.ka + k.kc - k.kb - k.kd)) / 2 + k.xi1 + k.xi2
    cdef double w = exp(-s * z) / (k.ka * k.kb * k.kc * k.kd * s)
    w = w / ((1.0 + k.xi1 * k.xi1) * (1.0 + k.xi2 * k.xi2))
    cdef double complex r = pab * pcd / den
    return w * r.real * k.qa * k.qb * k.qd


def single_eval(double[:, ::1] x, double z):
    cdef Py_ssize_t n = x.shape[0], i
    if x.shape[1] != 7:
        raise ValueError("expected an (N, 7) array")
    out = np.empty(n)
    cdef double[::1] o = out
    cdef Kin k
    with nogil:
        for i in range(n):
            _kin(x[i, 0], x[i, 1], x[i, 2], x[i, 3], x[i, 4], x[i, 5], x[i, 6], &k)
            o[i] = _single_point(&k, z)
    return out


def double_eval(double[:, ::1] x, double z, int reading=0, int weights=0):
    cdef Py_ssize_t n = x.shape[0], i
    if x.shape[1] != 9:
        raise ValueError("expected an (N, 9) array")
    out = np.empty(n)
    cdef double[::1] o = out
    cdef Kin k
    with nogil:
        for i in range(n):
            _kin(x[i, 0], x[i, 1], x[i, 2], x[i, 3], x[i, 4], x[i, 5], x[i, 6], &k)
            o[i] = _double_point(&k, x[i, 7], x[i, 8], z, reading, weights)
    return out


cdef inline double _rational(double t, double mu, double* jac) noexcept nogil:
    cdef double s = 1.0 - t
    jac[0] *= mu / (s * s)
    return mu * t / s


def single_samples(double[:, ::1] u, double z, double mu_xi, double mu_q):
    cdef Py_ssize_t n = u.shape[0], i
    if u.shape[1] != 7:
        raise ValueError("expected an (N, 7) array")
    out = np.empty(n)
    cdef double[::1] o = out
    cdef Kin k
    cdef double jac, xi1, xi2, qa, qb, qd, v
    with nogil:
        for i in range(n):
            jac = TWO_PI * TWO_PI
            xi1 = _rational(u[i, 0], mu_xi, &jac)
            xi2 = _rational(u[i, 1], mu_xi, &jac)
            qa = _rational(u[i, 2], mu_q, &jac)
            qb = _rational(u[i, 3], mu_q, &jac)
            qd = _rational(u[i, 4], mu_q, &jac)
            _kin(xi1, xi2, qa, qb, qd, TWO_PI * u[i, 5], TWO_PI * u[i, 6], &k)
            v = _single_point(&k, z)
            o[i] = v * jac if v != 0 else 0.0
    return out


def double_samples(double[:, ::1] u, double z, double mu_xi, double mu_q,
                   int reading=0, int weights=0):
    cdef Py_ssize_t n = u.shape[0], i
    if u.shape[1] != 9:
        raise ValueError("expected an (N, 9) array")
    out = np.empty(n)
    cdef double[::1] o = out
    cdef Kin k
    cdef double jac, xi1, xi2, qa, qb, qd, v
    with nogil:
        for i in range(n):
            jac = TWO_PI * TWO_PI * 2.0 * TWO_PI
            xi1 = _rational(u[i, 0], mu_xi, &jac)
            xi2 = _rational(u[i, 1], mu_xi, &jac)
            qa = _rational(u[i, 2], mu_q, &jac)
            qb = _rational(u[i, 3], mu_q, &jac)
            qd = _rational(u[i, 4], mu_q, &jac)
            _kin(xi1, xi2, qa, qb, qd, TWO_PI * u[i, 5], TWO_PI * u[i, 6], &k)
            v = _double_point(&k, 2.0 * u[i, 7] - 1.0, TWO_PI * u[i, 8], z, reading, weights)
            o[i] = v * jac if v != 0 else 0.0
    return out
