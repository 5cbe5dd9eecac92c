# -*- coding: utf-8 -*-
import numpy as np
import pytest

from core_types import NODE, BlockDims
from direct import WeylSamples, constant_potential_weyl_oracle, zeta_grid
from errors import AliasingError, GridError
from transform import (derivative_consistency, eta_independence_check, l2_norm, origin_value,
                       phi1_from_weyl, quadrature_weights, restrict, synthetic_phi1,
                       tail_coefficient, truncation_study, weyl_transform, zero_phi1)

SCALAR = BlockDims(1, 1)


def constant_samples(value, eta=1.0, a=200.0, nz=2048):
    zeta = zeta_grid(a, nz)
    return WeylSamples(SCALAR, eta, zeta, np.full((nz, 1, 1), value, dtype=complex))


def oracle_samples(c, eta=1.0, a=200.0, nz=2048):
    zeta = zeta_grid(a, nz)
    values = np.array([constant_potential_weyl_oracle(c, x + 1j * eta) for x in zeta])
    return WeylSamples(SCALAR, eta, zeta, values.reshape(nz, 1, 1))


def _step_error(phi1, L):
    h = phi1.h
    err = phi1.samples[1:, 0, 0] + 0.5
    return float(np.sqrt(h * np.sum(np.abs(err) ** 2))) / (0.5 * np.sqrt(L))


def test_zero_samples_give_zero_transform():
    phi = weyl_transform(constant_samples(0.0), 2.0, 64)
    np.testing.assert_allclose(phi.phi1.samples, 0, atol=1e-15)
    np.testing.assert_allclose(phi.phi1_prime.samples, 0, atol=1e-15)
    assert phi.diagnostics["origin_value"] == 0


def test_constant_weyl_function_gives_step():
    """φ ≡ 0.5 不是 Weyl 函数：Φ₁ ≈ −0.5（x > 0），原点处跳变"""
    L, n = 2.0, 512
    err_200 = _step_error(phi1_from_weyl(constant_samples(0.5), L, n).phi1, L)
    err_400 = _step_error(phi1_from_weyl(constant_samples(0.5, a=400.0, nz=4096), L, n).phi1, L)
    assert err_200 <= 0.05
    assert err_400 < err_200

    phi = weyl_transform(constant_samples(0.5), L, n)
    assert abs(origin_value(phi, 200.0)[0, 0] + 0.5) < 0.05


def test_tail_coefficient_of_constant_potential():
    # φ ~ −1/(2z) for v ≡ 1
    kappa = tail_coefficient(oracle_samples(1.0))
    assert kappa[0, 0] == pytest.approx(-0.5, abs=1e-3)


def test_transform_of_true_weyl_function_vanishes_at_origin():
    phi = weyl_transform(oracle_samples(1.0), 2.0, 256)
    assert abs(phi.diagnostics["origin_value"]) < 2.5e-2
    assert phi.diagnostics["derivative_consistency_l2"] < 5e-2


def test_eta_independence():
    distance = eta_independence_check(oracle_samples(1.0, eta=0.5), oracle_samples(1.0, eta=1.5),
                                      2.0, 256)
    assert distance <= 1e-3


def test_aliasing_is_rejected():
    coarse = constant_samples(0.1, a=200.0, nz=64)
    with pytest.raises(AliasingError) as info:
        phi1_from_weyl(coarse, 2.0, 64)
    assert info.value.required_step == pytest.approx(np.pi / 4)


def test_asymmetric_grid_is_rejected():
    zeta = np.linspace(-10.0, 12.0, 64)
    w = WeylSamples(SCALAR, 1.0, zeta, np.zeros((64, 1, 1)))
    with pytest.raises(GridError):
        phi1_from_weyl(w, 1.0, 16)


def test_taper_only_touches_outer_band():
    w = constant_samples(0.0, a=100.0, nz=1001)
    plain = quadrature_weights(w)
    tapered = quadrature_weights(w, taper=True)
    inner = np.abs(w.zeta) <= 90.0
    np.testing.assert_allclose(tapered[inner], plain[inner])
    assert tapered[0] == pytest.approx(0.0, abs=1e-15)
    assert np.all(tapered <= plain + 1e-15)


def test_truncation_study_on_true_weyl_function():
    study = truncation_study(oracle_samples(1.0), 2.0, 128)
    assert study["convergent"]
    assert study["a_values"] == pytest.approx([50.0, 100.0, 200.0])
    assert len(study["changes"]) == 2


def test_restrict_keeps_symmetric_window():
    w = restrict(constant_samples(0.2), 50.0)
    assert w.is_symmetric()
    assert w.a <= 50.0


def test_synthetic_profile_layouts():
    phi = synthetic_phi1(SCALAR, lambda x: x, lambda x: 1.0, 1.0, 8)
    assert phi.phi1.layout == NODE
    np.testing.assert_allclose(phi.phi1.samples[:, 0, 0].real, np.arange(9) / 8)
    assert derivative_consistency(phi) == pytest.approx(0.0, abs=1e-14)
    prefix = phi.prefix(4)
    assert prefix.n == 4 and prefix.L == pytest.approx(0.5)

    zero = zero_phi1(BlockDims(1, 2), 1.0, 8)
    assert zero.phi1.shape == (2, 1)


def test_l2_norm_layouts():
    ones = np.ones((5, 1, 1))
    assert l2_norm(ones, 0.25, NODE) == pytest.approx(1.0)
    assert l2_norm(ones[:4], 0.25) == pytest.approx(1.0)
