"""Mode kinematics and polarization scalar products at imaginary frequency.

Four plane-wave modes enter the fluctuation integrals: a and c are incoming
(towards the medium), b and d outgoing.  Transverse momenta are in-plane
2-vectors; q_d lies on the x axis, q_b makes the angle ``phi`` and q_a the
angle ``phi_prime`` with it, and q_c = q_a - q_b + q_d.

With k = q +- i kappa z_hat and |k| = i xi, the TM vector times xi is
s kappa q_hat + i q z_hat (s = +1 incoming, -1 outgoing), and TE is
z_hat x q_hat.  Dot products are bilinear (no complex conjugation), which
gives the closed forms below, e.g. for a TM-TM pair

    xi^2 eps_TM(x).eps_TM(y) = -(kappa_x kappa_y cos(phi_x - phi_y) + q_x q_y).
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Pol",
    "ModeQuad",
    "PolarizationAssignment",
    "ALL_ASSIGNMENTS",
    "eps_dot_ab",
    "eps_dot_cd",
    "build_polarization_vectors",
    "QC_DEGENERATE_RTOL",
]

QC_DEGENERATE_RTOL = 1e-12
_QC_PERTURB = 1e-9


class Pol(enum.IntEnum):
    TE = 0
    TM = 1


@dataclass(frozen=True)
class PolarizationAssignment:
    pa: Pol
    pb: Pol
    pc: Pol
    pd: Pol

    def __iter__(self):
        return iter((self.pa, self.pb, self.pc, self.pd))

    @property
    def n_tm(self) -> int:
        return sum(int(p) for p in self)


ALL_ASSIGNMENTS = tuple(PolarizationAssignment(*p) for p in itertools.product(Pol, repeat=4))


@dataclass(frozen=True)
class ModeQuad:
    """Kinematic state of the four modes.  Fields may be numpy arrays.

    Derived attributes (set at construction): ``qc``, ``cos_c``, ``sin_c``
    (direction of q_c relative to q_d) and ``kappa_a`` .. ``kappa_d``.
    """

    xi1: object
    xi2: object
    qa: object
    qb: object
    qd: object
    phi: object
    phi_prime: object

    def __post_init__(self):
        f = {k: np.asarray(getattr(self, k), dtype=float) for k in self.__dataclass_fields__}
        for k in ("xi1", "xi2", "qa", "qb", "qd"):
            if np.any(f[k] < 0) or np.any(np.isnan(f[k])):
                raise ValueError(f"{k} must be >= 0")
        xi1, xi2, qa, qb, qd = f["xi1"], f["xi2"], f["qa"], f["qb"], f["qd"]
        phi, php = f["phi"], f["phi_prime"]
        # law of cosines for |q_c|^2, clamped against roundoff
        qc2 = (qa * qa + qb * qb + qd * qd - 2 * qa * qb * np.cos(php - phi)
               + 2 * qa * qd * np.cos(php) - 2 * qb * qd * np.cos(phi))
        qc = np.sqrt(np.maximum(qc2, 0.0))
        cx = qd - qb * np.cos(phi) + qa * np.cos(php)
        cy = qa * np.sin(php) - qb * np.sin(phi)
        scale = np.maximum(np.maximum(qa, qb), qd)
        degen = qc <= QC_DEGENERATE_RTOL * scale
        # approach the degenerate point along q_d (radially in q_d)
        cx = np.where(degen, cx + _QC_PERTURB * np.where(scale > 0, scale, 1.0), cx)
        norm = np.hypot(cx, cy)
        cos_c, sin_c = cx / norm, cy / norm
        s = object.__setattr__
        s(self, "qc", _scalar(qc))
        s(self, "cos_c", _scalar(cos_c))
        s(self, "sin_c", _scalar(sin_c))
        s(self, "kappa_a", _scalar(np.sqrt(xi1 * xi1 + qa * qa)))
        s(self, "kappa_b", _scalar(np.sqrt(xi1 * xi1 + qb * qb)))
        s(self, "kappa_c", _scalar(np.sqrt(xi2 * xi2 + qc * qc)))
        s(self, "kappa_d", _scalar(np.sqrt(xi2 * xi2 + qd * qd)))

    def q_vectors(self):
        """In-plane vectors (q_a, q_b, q_c, q_d), each of shape (2, ...)."""
        qa, qb, qd = (np.asarray(x, dtype=float) for x in (self.qa, self.qb, self.qd))
        phi, php = np.asarray(self.phi, dtype=float), np.asarray(self.phi_prime, dtype=float)
        va = np.stack([qa * np.cos(php), qa * np.sin(php)])
        vb = np.stack([qb * np.cos(phi), qb * np.sin(phi)])
        vd = np.stack([qd, np.zeros_like(qd)])
        return va, vb, va - vb + vd, vd


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def _pair_dot(px, py, xi, kx, ky, qx, qy, c, s):
    """Scalar product for modes x (incoming) and y (outgoing).

    ``c``, ``s`` are cos/sin of (phi_x - phi_y).
    """
    px, py = Pol(px), Pol(py)
    if (px == Pol.TM or py == Pol.TM) and np.any(np.asarray(xi) == 0):
        raise ValueError("TM polarization vector is undefined at xi = 0")
    if px == Pol.TE and py == Pol.TE:
        return c
    if px == Pol.TE:
        return ky * s / xi
    if py == Pol.TE:
        return kx * s / xi
    return -(kx * ky * c + qx * qy) / (xi * xi)


def eps_dot_ab(mq: ModeQuad, pa, pb):
    """eps_pa(q_a) . eps_pb(q_b)."""
    d = np.asarray(mq.phi_prime, dtype=float) - np.asarray(mq.phi, dtype=float)
    return _scalar(_pair_dot(pa, pb, np.asarray(mq.xi1, dtype=float), mq.kappa_a, mq.kappa_b,
                             mq.qa, mq.qb, np.cos(d), np.sin(d)))


def eps_dot_cd(mq: ModeQuad, pc, pd):
    """eps_pc(q_c) . eps_pd(q_d), with q_d along x."""
    return _scalar(_pair_dot(pc, pd, np.asarray(mq.xi2, dtype=float), mq.kappa_c, mq.kappa_d,
                             mq.qc, mq.qd, mq.cos_c, mq.sin_c))


def build_polarization_vectors(q_vec, xi, kappa, direction: str, ref_azimuth: float | None = None):
    """Explicit (TE, TM) 3-vectors of one mode.

    TE = z_hat x q_hat and TM = TE x k_hat with k = q + s i kappa z_hat,
    |k| = i xi; s = +1 for ``direction='incoming'`` and -1 for 'outgoing'.
    Returned as complex arrays of shape (3, ...).  ``ref_azimuth`` fixes
    q_hat when q_vec vanishes.
    """
    if direction not in ("incoming", "outgoing"):
        raise ValueError("direction must be 'incoming' or 'outgoing'")
    sgn = 1.0 if direction == "incoming" else -1.0
    q_vec = np.asarray(q_vec, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise ValueError("TM polarization vector is undefined at xi = 0")
    qx, qy = q_vec[0], q_vec[1]
    q = np.hypot(qx, qy)
    if np.any(q == 0):
        if ref_azimuth is None:
            raise ValueError("q_vec = 0 needs a reference azimuth")
        ux = np.where(q > 0, qx / np.where(q > 0, q, 1), math.cos(ref_azimuth))
        uy = np.where(q > 0, qy / np.where(q > 0, q, 1), math.sin(ref_azimuth))
    else:
        ux, uy = qx / q, qy / q
    zero = np.zeros_like(ux)
    qhat = np.stack([ux, uy, zero]).astype(complex)
    zhat = np.stack([zero, zero, zero + 1.0]).astype(complex)
    te = np.cross(zhat, qhat, axis=0)
    # k_hat = (q + s i kappa z_hat) / (i xi)
    khat = (q * qhat + sgn * 1j * kappa * zhat) / (1j * xi)
    tm = np.cross(te, khat, axis=0)
    return te, tm
