import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimir_fluct.polarization import ModeQuad
from casimir_fluct.quadrature import QuadSpec
from casimir_fluct.units import ModelParams
from casimir_fluct.variance_single import (
    default_spec_single,
    gamma_single,
    integrand_single,
    variance_single,
    variance_single_reduced,
)

SMALL = default_spec_single(budget=1 << 12, replications=8, seed=3)


def test_symmetric_point_exchange():
    # xi1 = xi2, equal magnitudes, phi = phi': swapping (xi1, a, b) <-> (xi2, c, d)
    p = ModelParams(0.2)
    mq = ModeQuad(0.8, 0.8, 0.5, 0.5, 0.5, 1.3, 1.3)
    assert mq.qc == pytest.approx(0.5)
    swapped = ModeQuad(0.8, 0.8, mq.qc, mq.qd, mq.qb, 1.3, 1.3)
    assert integrand_single(mq, p) == pytest.approx(integrand_single(swapped, p), rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 3), st.floats(0.01, 3), st.floats(0, 3), st.floats(0, 3), st.floats(0, 3),
       st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_integrand_nonnegative(xi1, xi2, qa, qb, qd, phi, php):
    assert integrand_single(ModeQuad(xi1, xi2, qa, qb, qd, phi, php), ModelParams(0.1)) >= 0


def test_distance_doubling():
    mq = ModeQuad(0.3, 0.9, 0.4, 0.7, 1.1, 0.6, 2.2)
    p = ModelParams(0.15)
    s = mq.kappa_a + mq.kappa_b + mq.kappa_c + mq.kappa_d
    r = integrand_single(mq, p.replace(z_over_lambda=0.3)) / integrand_single(mq, p)
    assert r == pytest.approx(math.exp(-s * p.z), rel=1e-12)


def test_backends_agree_pointwise():
    mq = ModeQuad(np.array([0.3, 1.2]), 0.5, 0.4, 0.7, 1.1, 0.6, 2.2)
    p = ModelParams(0.15)
    a = integrand_single(mq, p, backend="numpy")
    b = integrand_single(mq, p)
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_integrand_rejects_zero_frequency():
    with pytest.raises(ValueError):
        integrand_single(ModeQuad(0.0, 0.5, 0.4, 0.7, 1.1, 0.6, 2.2), ModelParams(1.0))


def test_strength_scaling_exact():
    base = ModelParams(1.0, n_alpha_s=1e-3)
    a = variance_single(base, SMALL)
    b = variance_single(base.replace(n_alpha_s=2e-3), SMALL)
    assert b.value / a.value == pytest.approx(4.0, rel=1e-12)


def test_variance_requires_strength():
    with pytest.raises(ValueError):
        variance_single(ModelParams(1.0), SMALL)


def test_reduced_positive_and_flagged():
    est = variance_single_reduced(ModelParams(1.0), SMALL.replace(target_rel_error=1e-6))
    assert est.value > 0 and est.std_error > 0
    assert not est.converged


def test_wrong_dimension():
    with pytest.raises(ValueError):
        variance_single_reduced(ModelParams(1.0), QuadSpec(dim=9, budget=64))


def test_gamma_independent_of_density():
    spec = SMALL
    a = gamma_single(ModelParams(1.0, n_alpha_s=1e-2, n_lambdaA3=1.0), spec)
    b = gamma_single(ModelParams(1.0, n_alpha_s=1e-2, n_lambdaA3=100.0), spec)
    # the scaled value does not depend on n at all
    assert a.gamma_scaled == pytest.approx(b.gamma_scaled, rel=1e-12)


def test_gamma_worker_independent():
    p = ModelParams(0.5)
    a = gamma_single(p, SMALL, workers=1)
    b = gamma_single(p, SMALL, workers=3)
    assert a.gamma_scaled == b.gamma_scaled


def test_gamma_crossover_value():
    g = gamma_single(ModelParams(1.0), default_spec_single(budget=1 << 15))
    assert 0.5 < g.gamma_scaled < 0.75
    assert g.stat_error / g.gamma_scaled < 0.02
