import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erf

from casimir_fluct.quadrature import (
    IntegralEstimate,
    NonFiniteSampleError,
    QuadSpec,
    gauss_legendre_01,
    integrate_2d,
    integrate_qmc,
    inverse_semiinfinite,
    map_semiinfinite,
    pairwise_sum,
)


def test_map_values():
    assert map_semiinfinite(0.5, 1.0) == (1.0, 4.0)
    v, j = map_semiinfinite(1e-12, 3.0)
    assert v == pytest.approx(3e-12) and j == pytest.approx(3.0)


@pytest.mark.parametrize("t", [0.0, 1.0, -0.1, 1.5])
def test_map_domain(t):
    with pytest.raises(ValueError):
        map_semiinfinite(t, 1.0)


def test_map_scale_must_be_positive():
    with pytest.raises(ValueError):
        map_semiinfinite(0.5, 0.0)


def test_map_gauss_legendre_exp():
    t, w = gauss_legendre_01(64)
    v, j = map_semiinfinite(t, 1.0)
    assert abs(np.sum(w * np.exp(-v) * j) - 1.0) < 1e-8


def test_map_inverse_grid():
    t = np.linspace(1e-6, 1 - 1e-6, 2001)
    for mu in (1e-3, 1.0, 250.0):
        v, _ = map_semiinfinite(t, mu)
        assert np.max(np.abs(inverse_semiinfinite(v, mu) - t)) < 1e-14


@given(st.floats(1e-9, 1 - 1e-9), st.floats(1e-6, 1e6))
def test_map_inverse_property(t, mu):
    v, j = map_semiinfinite(t, mu)
    assert v > 0 and j > 0
    assert inverse_semiinfinite(v, mu) == pytest.approx(t, abs=1e-14)


def test_quadspec_validation():
    with pytest.raises(ValueError):
        QuadSpec(dim=2, budget=1000)
    with pytest.raises(ValueError):
        QuadSpec(dim=2, replications=1)
    with pytest.raises(ValueError):
        QuadSpec(dim=0)
    with pytest.raises(ValueError):
        QuadSpec(dim=2, seed=-1)
    assert QuadSpec(dim=3).replace(budget=8).budget == 8


def _pullback(f, mu=1.0):
    def g(t1, t2):
        v1, j1 = map_semiinfinite(t1, mu)
        v2, j2 = map_semiinfinite(t2, mu)
        return f(v1, v2) * j1 * j2
    return g


def test_2d_constant():
    r = integrate_2d(lambda a, b: np.ones_like(a), QuadSpec(dim=2, target_rel_error=1e-12))
    assert r.value == pytest.approx(1.0, abs=1e-14)
    assert r.converged


def test_2d_separable_exponential():
    r = integrate_2d(_pullback(lambda a, b: np.exp(-a - b)), QuadSpec(dim=2, target_rel_error=1e-10))
    assert abs(r.value - 1.0) < 1e-8
    assert r.converged


def test_2d_endpoint_singularity():
    r = integrate_2d(_pullback(lambda a, b: a**-0.5 * np.exp(-a - b)), QuadSpec(dim=2, target_rel_error=1e-6))
    assert abs(r.value - math.sqrt(math.pi)) < 1e-6
    assert r.converged
    assert r.std_error >= abs(r.value - math.sqrt(math.pi))


def test_2d_flags_nonconvergence():
    def rough(t1, t2):
        return np.abs(np.sin(200 * t1 * t2)) ** 0.1

    r = integrate_2d(rough, QuadSpec(dim=2, target_rel_error=1e-12, max_sweeps=2))
    assert not r.converged
    assert math.isfinite(r.value)


def test_2d_nonfinite_sample():
    with pytest.raises(NonFiniteSampleError) as info:
        integrate_2d(lambda a, b: np.where(a > 0.5, np.nan, 1.0), QuadSpec(dim=2, target_rel_error=1e-6))
    assert info.value.point.size >= 1


def test_qmc_constant():
    r = integrate_qmc(lambda u: np.ones(len(u)), QuadSpec(dim=5, budget=1 << 10))
    assert r.value == 1.0 and r.std_error == 0.0
    assert r.n_total == (1 << 10) * 16


def test_qmc_product_moment():
    r = integrate_qmc(lambda u: np.prod(u, axis=1), QuadSpec(dim=7, budget=1 << 14))
    assert abs(r.value - 2.0**-7) <= 3 * r.std_error


def _gauss_bump(u, c=0.4, s=0.3):
    return np.exp(-np.sum(((u - c) / s) ** 2, axis=1))


def _gauss_truth(d, c=0.4, s=0.3):
    one = 0.5 * math.sqrt(math.pi) * s * (erf((1 - c) / s) + erf(c / s))
    return one**d


def test_qmc_gaussian_bump():
    r = integrate_qmc(_gauss_bump, QuadSpec(dim=7, budget=1 << 18))
    assert abs(r.value - _gauss_truth(7)) <= 3 * r.std_error


def test_qmc_nan_reports_point():
    def f(u):
        v = np.ones(len(u))
        v[3] = np.nan
        return v

    with pytest.raises(NonFiniteSampleError) as info:
        integrate_qmc(f, QuadSpec(dim=3, budget=1 << 8))
    assert info.value.index == 3
    assert info.value.point.shape == (3,)


def test_qmc_determinism_across_workers():
    spec = QuadSpec(dim=7, budget=1 << 15, seed=99)
    vals = {w: integrate_qmc(_gauss_bump, spec, workers=w) for w in (1, 2, 5)}
    assert len({(v.value, v.std_error) for v in vals.values()}) == 1


def test_qmc_chunking_is_index_addressed():
    # budget above the chunk size exercises several chunks per replication
    spec = QuadSpec(dim=3, budget=1 << 16, replications=2, seed=5)
    a = integrate_qmc(lambda u: u[:, 0] * u[:, 1], spec)
    b = integrate_qmc(lambda u: u[:, 0] * u[:, 1], spec)
    assert a.value == b.value


def test_qmc_seed_changes_value():
    a = integrate_qmc(_gauss_bump, QuadSpec(dim=4, budget=1 << 10, seed=1))
    b = integrate_qmc(_gauss_bump, QuadSpec(dim=4, budget=1 << 10, seed=2))
    assert a.value != b.value


def test_converged_flag():
    r = integrate_qmc(_gauss_bump, QuadSpec(dim=7, budget=1 << 4, replications=4, target_rel_error=1e-9))
    assert not r.converged


def test_pairwise_sum_order():
    xs = [1e16, 1.0, -1e16, 1.0]
    assert pairwise_sum(xs) == (1e16 + 1.0) + (-1e16 + 1.0)
    assert pairwise_sum([]) == 0.0
    assert pairwise_sum([2.5]) == 2.5


def test_estimate_scaling():
    e = IntegralEstimate(2.0, 0.1, 10, 1, True, (), (1.9, 2.1))
    s = e.scaled(-3.0)
    assert s.value == -6.0 and s.std_error == pytest.approx(0.3)
    assert s.replicate_values == pytest.approx((-5.7, -6.3))
    assert e.rel_error == pytest.approx(0.05)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32))
def test_qmc_monomial_property(d, seed):
    r = integrate_qmc(lambda u: np.sum(u, axis=1), QuadSpec(dim=d, budget=1 << 8, seed=seed))
    assert abs(r.value - d / 2) <= max(6 * r.std_error, 1e-8)
