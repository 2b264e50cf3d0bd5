import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimir_fluct.empotential import (
    ETA_LONG,
    EtaConvergenceError,
    avg_potential_integrand,
    eta,
    eta_asymptote,
    fresnel_te,
    fresnel_tm,
    u_star,
)
from casimir_fluct.oracle import eta_bruteforce, fit_power_law
from casimir_fluct.units import DilutenessWarning, ModelParams

pos = st.floats(1e-4, 1e3)


@given(pos, pos)
def test_no_contrast_no_reflection(xi, q):
    assert fresnel_te(xi, q, 1.0) == 0.0
    assert fresnel_tm(xi, q, 1.0) == 0.0


@given(pos, pos, st.floats(1.0 + 1e-9, 1e8))
def test_fresnel_ranges(xi, q, eps):
    te, tm = fresnel_te(xi, q, eps), fresnel_tm(xi, q, eps)
    assert -1 < te < 0
    assert 0 < tm < 1


def test_perfect_mirror_limit():
    assert fresnel_te(1.0, 0.7, 1e14) == pytest.approx(-1.0, abs=1e-6)
    assert fresnel_tm(1.0, 0.7, 1e14) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("xi, q", [(0.3, 0.2), (2.0, 1e-3), (1e-3, 5.0)])
def test_match_textbook_quotients(xi, q):
    eps = 3.7
    k, kt = math.hypot(xi, q), math.sqrt(eps * xi * xi + q * q)
    assert fresnel_te(xi, q, eps) == pytest.approx((k - kt) / (k + kt), rel=1e-13)
    assert fresnel_tm(xi, q, eps) == pytest.approx((eps * k - kt) / (eps * k + kt), rel=1e-13)


def test_te_first_order():
    # xi = q: r_TE ~ -(eps - 1) xi^2 / (4 kappa^2) = -(eps - 1)/8
    for d in (1e-3, 1e-5):
        assert fresnel_te(1.0, 1.0, 1 + d) == pytest.approx(-d / 8, rel=2 * d)
    v = fresnel_te(1.0, 1.0, 1.05)
    assert -0.0125 < v < 0


@given(st.floats(1.0, 1e4))
def test_tm_normal_incidence(eps):
    s = math.sqrt(eps)
    assert fresnel_tm(0.8, 0.0, eps) == pytest.approx((eps - s) / (eps + s), rel=1e-12)


@pytest.mark.parametrize("args", [(0.0, 0.0, 2.0), (-1.0, 1.0, 2.0), (1.0, 1.0, 0.5)])
def test_fresnel_domain(args):
    with pytest.raises(ValueError):
        fresnel_te(*args)
    with pytest.raises(ValueError):
        fresnel_tm(*args)


def test_integrand_vacuum_zero():
    xi, q = np.meshgrid(np.linspace(0.01, 3, 7), np.linspace(0, 3, 7))
    assert np.all(avg_potential_integrand(xi, q, ModelParams(0.3)) == 0)


def test_integrand_finite_at_xi_zero():
    v = avg_potential_integrand(0.0, 0.5, ModelParams(0.1, n_alpha_s=0.05))
    assert math.isfinite(v) and v < 0


def test_integrand_linear_in_contrast():
    xi, q = 0.4, 0.9
    p = ModelParams(0.05)
    f1 = avg_potential_integrand(xi, q, p.replace(n_alpha_s=1e-6))
    f2 = avg_potential_integrand(xi, q, p.replace(n_alpha_s=2e-6))
    assert f2 / f1 == pytest.approx(2.0, rel=1e-5)


def test_integrand_distance_doubling():
    xi, q = 0.3, 0.2
    p = ModelParams(0.1, n_alpha_s=0.02)
    k = math.hypot(xi, q)
    ratio = avg_potential_integrand(xi, q, p.replace(z_over_lambda=0.2)) / avg_potential_integrand(xi, q, p)
    assert ratio == pytest.approx(math.exp(-2 * k * p.z), rel=1e-12)


def test_u_star():
    assert u_star(1 / (2 * math.pi)) == pytest.approx(-3 / (32 * math.pi**2))
    pts = [(z, -u_star(z)) for z in np.logspace(-1, 1, 6)]
    assert fit_power_law(pts)[0] == pytest.approx(-4.0, abs=1e-12)


def test_eta_long():
    pt = eta(ModelParams(100.0))
    assert pt.eta_over_nalphas == pytest.approx(23 / 60, rel=1e-2)
    assert pt.converged and pt.abs_error <= 1e-4


def test_eta_short():
    pt = eta(ModelParams(1e-3))
    assert pt.eta_over_nalphas == pytest.approx(math.pi**2 / 3 * 1e-3, rel=2e-2)


def test_eta_intermediate_matches_oracle():
    p = ModelParams(1.0)
    v = eta(p, tol=1e-6).eta_over_nalphas
    assert 0 < v < ETA_LONG
    assert v == pytest.approx(eta_bruteforce(p, 512), abs=1e-5)


def test_eta_nonlinear_matches_oracle():
    p = ModelParams(0.3, n_alpha_s=0.05, eps_bg=1.0)
    a = eta(p, tol=1e-6, linearized=False).eta_over_nalphas
    assert a == pytest.approx(eta_bruteforce(p, 512), rel=1e-4)


def test_eta_general_background():
    p = ModelParams(1.0, n_alpha_s=0.01, eps_bg=2.0)
    pt = eta(p)
    assert 0 < pt.eta < 1
    with pytest.raises(ValueError):
        eta(p, linearized=True)


def test_eta_linearity_in_strength():
    a = eta(ModelParams(1.0, n_alpha_s=1e-3), linearized=False, tol=1e-6).eta_over_nalphas
    b = eta(ModelParams(1.0, n_alpha_s=1e-2), linearized=False, tol=1e-6).eta_over_nalphas
    assert abs(a / b - 1) < 5e-3


def test_eta_perfect_mirror():
    with pytest.warns(DilutenessWarning):
        p = ModelParams(100.0, n_alpha_s=1e6 - 1)
    assert eta(p, linearized=False, tol=1e-5).eta == pytest.approx(1.0, rel=1e-2)


def test_eta_positive_on_grid():
    for z in np.logspace(-3, 2, 11):
        assert eta(ModelParams(float(z))).eta_over_nalphas > 0


def test_eta_strict_raises():
    with pytest.raises(EtaConvergenceError) as info:
        eta(ModelParams(1.0), tol=1e-15, max_sweeps=2, strict=True)
    assert not info.value.estimate.converged


def test_eta_nan_ratio_without_strength():
    pt = eta(ModelParams(1.0, eps_bg=2.0))
    assert math.isnan(pt.eta_over_nalphas)
    assert pt.eta > 0


def test_potential_slopes():
    def slope(lo, hi):
        zs = np.logspace(math.log10(lo), math.log10(hi), 5)
        pts = [(z, eta(ModelParams(float(z)), tol=1e-7).eta_over_nalphas * -u_star(z)) for z in zs]
        return fit_power_law(pts)[0]

    assert slope(1e-4, 1e-3) == pytest.approx(-3.0, rel=0.03)
    assert slope(10, 100) == pytest.approx(-4.0, rel=0.03)


def test_asymptotes():
    assert eta_asymptote(5.0, "long") == pytest.approx(0.383333, abs=1e-6)
    assert eta_asymptote(0.01, "short") == pytest.approx(0.0328987, rel=1e-6)
    assert eta_asymptote(0.0, "short") == 0.0
    with pytest.raises(ValueError):
        eta_asymptote(1.0, "medium")


@settings(max_examples=15, deadline=None)
@given(st.floats(-2.5, 1.5))
def test_eta_bounded_property(logz):
    v = eta(ModelParams(10**logz)).eta_over_nalphas
    assert 0 < v < ETA_LONG * 1.0001
