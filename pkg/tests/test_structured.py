# -*- coding: utf-8 -*-
import numpy as np
import pytest

from core_types import BlockDims
from errors import GridError, NotPositiveDefiniteError
from structured import (AccelerantKernel, apply_E, apply_E_adjoint_tail, assemble_S,
                        cells_on_grid, factor_residual, factorize, first_nonpositive_block,
                        identity_residual, lower_toeplitz, min_eigenvalue_sweep, positivity)
from transform import synthetic_phi1, zero_phi1

SCALAR = BlockDims(1, 1)
RECT = BlockDims(1, 2)


def linear_kernel(L=2.0, n=512):
    phi = synthetic_phi1(SCALAR, lambda x: x, lambda x: 1.0, L, n)
    return phi, AccelerantKernel.from_profile(phi)


def smooth_rect_kernel(L=1.0, n=64):
    phi = synthetic_phi1(RECT,
                         lambda x: [[0.3 * np.sin(x)], [0.2 * (1 - np.cos(x))]],
                         lambda x: [[0.3 * np.cos(x)], [0.2 * np.sin(x)]], L, n)
    return phi, AccelerantKernel.from_profile(phi)


def test_zero_kernel_gives_identity():
    kernel = AccelerantKernel.from_profile(zero_phi1(RECT, 1.0, 16))
    S = assemble_S(kernel, 1.0)
    np.testing.assert_array_equal(S.matrix, np.eye(32))
    factor = factorize(S)
    np.testing.assert_array_equal(factor.C, np.eye(32))
    np.testing.assert_array_equal(factor.E, np.eye(32))


def test_lower_toeplitz_structure():
    _, kernel = linear_kernel(L=1.0, n=8)
    L = lower_toeplitz(kernel, 8)
    h = 1.0 / 8
    assert L[0, 0] == pytest.approx(h / 2)
    assert L[5, 2] == pytest.approx(h)
    assert L[2, 5] == 0
    np.testing.assert_allclose(np.diag(L, -3), h)


def test_lower_toeplitz_uses_galerkin_weights():
    h = 0.25
    q = np.arange(1.0, 5.0).reshape(4, 1, 1)
    L = lower_toeplitz(AccelerantKernel(SCALAR, q, h), 4)
    # 对角 h·q₀/2，次对角 h·(q₀ + q₁)/2，而非 √h·q
    np.testing.assert_allclose(np.diag(L), 0.5 * h)
    np.testing.assert_allclose(np.diag(L, -1), 1.5 * h)
    np.testing.assert_allclose(np.diag(L, -2), 2.5 * h)


def test_prefix_l2_is_monotone():
    _, kernel = smooth_rect_kernel()
    prefix = kernel.prefix_l2()
    assert np.all(np.diff(prefix) >= 0)


def test_min_kernel_eigenvalue_at_xi_one():
    # s(x, t) = min(x, t)，最大特征值 (2ξ/π)²
    _, kernel = linear_kernel()
    min_eig, ok = positivity(assemble_S(kernel, 1.0))
    assert ok
    assert min_eig == pytest.approx(1 - (2 / np.pi) ** 2, abs=1e-3)


def test_min_kernel_loses_positivity_past_half_pi():
    _, kernel = linear_kernel()
    S = assemble_S(kernel, 2.0)
    assert not positivity(S)[1]
    block = first_nonpositive_block(S)
    h = kernel.h
    assert abs((block + 1) * h - np.pi / 2) <= 2 * h
    with pytest.raises(NotPositiveDefiniteError) as info:
        factorize(S)
    assert info.value.block == block


def test_nested_minimum_eigenvalues_decrease():
    _, kernel = linear_kernel(L=2.0, n=128)
    S = assemble_S(kernel, 2.0)
    sweep = min_eigenvalue_sweep(S, [16, 32, 64, 96, 128])
    assert np.all(np.diff(sweep) <= 1e-12)


def test_factorization_inverts_S():
    _, kernel = smooth_rect_kernel()
    S = assemble_S(kernel, 1.0)
    factor = factorize(S)
    assert factor_residual(factor, S) <= 1e-10
    np.testing.assert_allclose(np.triu(factor.C, 2), 0)
    np.testing.assert_allclose(factor.C @ factor.C.conj().T, S.matrix, atol=1e-12)


def test_factorization_nests_under_truncation():
    _, kernel = smooth_rect_kernel()
    S = assemble_S(kernel, 1.0)
    factor = factorize(S)
    for k in (8, 31, 50):
        small = factorize(S.leading(k))
        size = k * S.m2
        np.testing.assert_allclose(small.C, factor.C[:size, :size], rtol=0, atol=1e-13)
        np.testing.assert_allclose(small.E, factor.E[:size, :size], rtol=0, atol=1e-12)
        np.testing.assert_allclose(factor.leading(k).E, small.E, rtol=0, atol=1e-12)


def test_diagonal_blocks_approach_identity():
    deviations = []
    for n in (32, 64, 128):
        _, kernel = smooth_rect_kernel(n=n)
        deviations.append(factorize(assemble_S(kernel, 1.0)).diagonal_deviation())
    assert deviations[0] > deviations[1] > deviations[2]


def test_tail_application_matches_dense_solves():
    _, kernel = smooth_rect_kernel(n=32)
    S = assemble_S(kernel, 1.0)
    factor = factorize(S)
    rng = np.random.default_rng(7)
    f = rng.standard_normal((32, 2, 1)) + 1j * rng.standard_normal((32, 2, 1))
    Y = apply_E_adjoint_tail(factor, f)
    assert isinstance(Y, np.ndarray)
    assert Y.shape == (32, 32, 2, 1)
    np.testing.assert_allclose(Y[9, 10:], 0, atol=1e-12)
    for p in (1, 10, 32):
        expected = np.linalg.solve(S.leading(p).matrix, f[:p].reshape(-1, 1))
        np.testing.assert_allclose(Y[p - 1, :p].reshape(-1, 1), expected, atol=1e-8)


def test_apply_E_is_causal():
    _, kernel = smooth_rect_kernel(n=32)
    factor = factorize(assemble_S(kernel, 1.0))
    f = np.zeros((32, 2, 1), dtype=complex)
    f[20:] = 1.0
    g = apply_E(factor, f)
    np.testing.assert_array_equal(g.samples[:20], 0)
    with pytest.raises(GridError):
        apply_E(factor, np.zeros((31, 2, 1)))


def test_identity_residual_is_first_order():
    residuals = []
    for n in (64, 128, 256):
        phi, kernel = linear_kernel(L=1.0, n=n)
        residuals.append(identity_residual(kernel, phi.phi1.samples, 1.0))
    ratios = [residuals[0] / residuals[1], residuals[1] / residuals[2]]
    for r in ratios:
        assert 1.7 <= r <= 2.3


def test_xi_must_lie_on_grid():
    assert cells_on_grid(0.5, 0.125, 8) == 4
    with pytest.raises(GridError):
        cells_on_grid(0.3, 0.125, 8)
    with pytest.raises(GridError):
        cells_on_grid(2.0, 0.125, 8)
