"""Self-verification suite behind ``casimir-fluct verify``.

Each check returns a ``CheckResult``; ``run_checks`` collects them.  The
``fast`` level covers the polarization tables, the integration engine on
known integrals, eta against its limits and against the brute-force oracle,
and the dual implementations of the variance integrands.  ``full`` adds the
7-D cross-method comparison and the fluctuation constants.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels, oracle
from . import polarization as pol
from .empotential import ETA_LONG, ETA_SHORT_SLOPE, eta
from .quadrature import QuadSpec, gauss_legendre_01, integrate_2d, integrate_qmc, map_semiinfinite
from .units import ModelParams

__all__ = ["CheckResult", "FAST_CHECKS", "FULL_CHECKS", "run_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _random_modes(rng, n):
    xi1, xi2 = rng.uniform(0.01, 3.0, (2, n))
    qa, qb, qd = rng.uniform(0.0, 3.0, (3, n))
    phi, php = rng.uniform(0.0, 2 * math.pi, (2, n))
    return pol.ModeQuad(xi1, xi2, qa, qb, qd, phi, php)


def check_polarization(n_draws=1000, seed=7, rtol=1e-12):
    rng = np.random.default_rng(seed)
    mq = _random_modes(rng, n_draws)
    va, vb, vc, vd = mq.q_vectors()
    ea = pol.build_polarization_vectors(va, mq.xi1, mq.kappa_a, "incoming")
    eb = pol.build_polarization_vectors(vb, mq.xi1, mq.kappa_b, "outgoing")
    ec = pol.build_polarization_vectors(vc, mq.xi2, mq.kappa_c, "incoming")
    ed = pol.build_polarization_vectors(vd, mq.xi2, mq.kappa_d, "outgoing")
    worst = 0.0
    for p in pol.Pol:
        for r in pol.Pol:
            for closed, x, y in ((pol.eps_dot_ab(mq, p, r), ea[p], eb[r]),
                                 (pol.eps_dot_cd(mq, p, r), ec[p], ed[r])):
                geo = np.sum(x * y, axis=0)
                dev = np.abs(geo - closed) / np.maximum(1.0, np.abs(closed))
                worst = max(worst, float(dev.max()))
    return worst <= rtol, f"max deviation {worst:.2e} over {n_draws} draws x 32 entries"


def check_map_rule():
    t, w = gauss_legendre_01(64)
    v, jac = map_semiinfinite(t, 1.0)
    val = float(np.sum(w * np.exp(-v) * jac))
    return abs(val - 1.0) <= 1e-8, f"int exp(-v) = {val:.12f}"


def check_integrate_2d():
    def sep(t1, t2):
        v1, j1 = map_semiinfinite(t1, 1.0)
        v2, j2 = map_semiinfinite(t2, 1.0)
        return np.exp(-v1 - v2) * j1 * j2

    def sing(t1, t2):
        v1, j1 = map_semiinfinite(t1, 1.0)
        v2, j2 = map_semiinfinite(t2, 1.0)
        return v1**-0.5 * np.exp(-v1 - v2) * j1 * j2

    a = integrate_2d(sep, QuadSpec(dim=2, target_rel_error=1e-10))
    b = integrate_2d(sing, QuadSpec(dim=2, target_rel_error=1e-7))
    ea, eb = abs(a.value - 1.0), abs(b.value - math.sqrt(math.pi))
    return ea <= 1e-8 and eb <= 1e-6, f"separable err {ea:.1e}, v^-1/2 err {eb:.1e}"


def check_qmc_moment():
    spec = QuadSpec(dim=7, budget=1 << 12, replications=16, seed=11)
    est = integrate_qmc(lambda u: np.prod(u, axis=1), spec)
    dev = abs(est.value - 2.0**-7)
    return dev <= 3 * est.std_error, f"deviation {dev:.2e}, 3 sigma {3 * est.std_error:.2e}"


def check_eta_limits():
    long = eta(ModelParams(100.0)).eta_over_nalphas
    short = eta(ModelParams(1e-3)).eta_over_nalphas
    rl = abs(long / ETA_LONG - 1)
    rs = abs(short / (ETA_SHORT_SLOPE * 1e-3) - 1)
    return rl <= 0.01 and rs <= 0.02, f"long {long:.6f} ({rl:.1e}), short {short:.4e} ({rs:.1e})"


def check_eta_oracle():
    p = ModelParams(1.0)
    a = eta(p, tol=1e-6).eta_over_nalphas
    b = oracle.eta_bruteforce(p, 512)
    return abs(a - b) <= 1e-5, f"quadrature {a:.8f}, brute force {b:.8f}"


def check_kernel_parity():
    if kernels.BACKEND != "cython":
        return True, "compiled backend not built; skipped"
    rng = np.random.default_rng(3)
    u = rng.random((4096, 9))
    z = 2 * math.pi
    worst = 0.0
    a = kernels.single_samples(u[:, :7], z, 1 / z, 1 / z, backend="cython")
    b = kernels.single_samples(u[:, :7], z, 1 / z, 1 / z, backend="numpy")
    worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    for rd in (0, 1):
        for wt in (0, 1):
            a = kernels.double_samples(u, z, 1 / z, 1 / z, rd, wt, backend="cython")
            b = kernels.double_samples(u, z, 1 / z, 1 / z, rd, wt, backend="numpy")
            worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    return worst <= 1e-12, f"max relative deviation {worst:.1e}"


def _random_physical(rng, n, z):
    x = np.empty((n, 9))
    x[:, 0:2] = rng.uniform(0.05, 2.0, (n, 2)) / z
    x[:, 2:5] = rng.uniform(0.05, 2.0, (n, 3)) / z
    x[:, 5:7] = rng.uniform(0, 2 * math.pi, (n, 2))
    x[:, 7] = rng.uniform(-1, 1, n)
    x[:, 8] = rng.uniform(0, 2 * math.pi, n)
    return x


def _vectors(x, rot):
    qa = np.stack([x[:, 2] * np.cos(x[:, 6] + rot), x[:, 2] * np.sin(x[:, 6] + rot)])
    qb = np.stack([x[:, 3] * np.cos(x[:, 5] + rot), x[:, 3] * np.sin(x[:, 5] + rot)])
    qd = np.stack([x[:, 4] * np.cos(rot), x[:, 4] * np.sin(rot)])
    return qa, qb, qd


def check_single_dual(n=200, seed=5):
    rng = np.random.default_rng(seed)
    z = 2 * math.pi
    x = _random_physical(rng, n, z)
    main = kernels.single_eval(x[:, :7], z)
    qa, qb, qd = _vectors(x, rng.uniform(0, 2 * math.pi))
    geo = oracle.single_integrand_geometric(x[:, 0], x[:, 1], qa, qb, qd, z) * x[:, 2] * x[:, 3] * x[:, 4]
    dev = float(np.max(np.abs(main - geo) / np.abs(geo)))
    return dev <= 1e-12, f"max relative deviation {dev:.1e} (rotated frame)"


def check_double_dual(n=200, seed=6):
    rng = np.random.default_rng(seed)
    z = 2 * math.pi
    x = _random_physical(rng, n, z)
    worst = 0.0
    for rd, rname in enumerate(("projected", "literal")):
        for wt, wname in enumerate(("derived", "squared")):
            main = kernels.double_eval(x, z, rd, wt)
            for i in range(n):
                st = math.sqrt(1 - x[i, 7] ** 2)
                rhat = (st * math.cos(x[i, 8]), st * math.sin(x[i, 8]), x[i, 7])
                qa, qb, qd = _vectors(x[i:i + 1], 0.0)
                g = oracle.double_integrand_geometric(
                    x[i, 0], x[i, 1], qa[:, 0], qb[:, 0], qd[:, 0], rhat, z, rname, wname
                ) * x[i, 2] * x[i, 3] * x[i, 4]
                worst = max(worst, abs(main[i] - g) / abs(g))
    return worst <= 1e-12, f"max relative deviation {worst:.1e}"


def check_variance_cross():
    from .variance_single import default_spec_single, variance_single_reduced

    p = ModelParams(1.0)
    bf = oracle.variance_single_bruteforce(p, grid_n=8)
    q = variance_single_reduced(p, default_spec_single(budget=1 << 16))
    comb = math.hypot(bf.error, q.std_error)
    dev = abs(bf.value - q.value)
    return dev <= 3 * comb, f"QMC {q.value:.4e} +- {q.std_error:.1e}, grid {bf.value:.4e} +- {bf.error:.1e}"


def check_gamma_single():
    from .variance_single import default_spec_single, gamma_single

    spec = default_spec_single(budget=1 << 16)
    lo = gamma_single(ModelParams(1e-2), spec).gamma_scaled
    hi = gamma_single(ModelParams(10.0), spec).gamma_scaled
    return abs(lo - 0.5) <= 0.1 and abs(hi - 0.7) <= 0.1, f"z/lambda=0.01: {lo:.4f}, z/lambda=10: {hi:.4f}"


def check_gamma_double():
    from .variance_double import default_spec_double, gamma_double

    spec = default_spec_double(budget=1 << 16)
    lo = gamma_double(ModelParams(1e-2), spec).gamma_scaled * 1e-4
    hi = gamma_double(ModelParams(10.0), spec).gamma_scaled * 1e3
    return abs(lo - 0.43) <= 0.07 and abs(hi - 0.15) <= 0.05, f"short {lo:.4f}, long {hi:.4f}"


FAST_CHECKS = [
    ("polarization oracle", check_polarization),
    ("semi-infinite map rule", check_map_rule),
    ("2-D adaptive quadrature", check_integrate_2d),
    ("QMC product moment", check_qmc_moment),
    ("eta limits", check_eta_limits),
    ("eta vs brute force", check_eta_oracle),
    ("kernel backend parity", check_kernel_parity),
    ("single integrand dual implementation", check_single_dual),
    ("double integrand dual implementation", check_double_dual),
]

FULL_CHECKS = FAST_CHECKS + [
    ("single variance QMC vs grid", check_variance_cross),
    ("single-scattering constants", check_gamma_single),
    ("double-scattering constants", check_gamma_double),
]


def run_checks(level: str = "fast"):
    checks = {"fast": FAST_CHECKS, "full": FULL_CHECKS}[level]
    out = []
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, named
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out
