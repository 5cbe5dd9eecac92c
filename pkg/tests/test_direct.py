# -*- coding: utf-8 -*-
import numpy as np
import pytest
from scipy.linalg import expm

from core_types import BlockDims, PotentialProfile, signature
from direct import (constant_potential_weyl_oracle, conservation_residual, extend_potential,
                    gram, propagate, propagate_batch, weyl_line, weyl_point, zeta_grid)
from errors import GramOverflowError, GridError, WeylConvergenceError


def _constant_system_matrix(c, z):
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    dims = BlockDims(*c.shape)
    j = signature(dims)
    V = np.zeros((dims.m, dims.m), dtype=complex)
    V[:dims.m1, dims.m1:] = c
    V[dims.m1:, :dims.m1] = c.conj().T
    return z * j + j @ V


@pytest.mark.parametrize("c", [1.0, np.array([[0.3, 0.4]])])
@pytest.mark.parametrize("z", [0.0, 1j, 1 + 1j, 2.5])
def test_propagate_matches_matrix_exponential(c, z):
    profile = PotentialProfile.constant(c, 1.0, 512)
    u = propagate(profile, z).u.samples
    A = _constant_system_matrix(c, z)
    for i in (1, 100, 256, 512):
        expected = expm(1j * (i / 512) * A)
        np.testing.assert_allclose(u[i], expected, rtol=0, atol=1e-8 * max(1.0, np.abs(expected).max()))
    np.testing.assert_allclose(u[0], np.eye(A.shape[0]))


def test_batch_agrees_with_single_points():
    profile = PotentialProfile.from_function(lambda x: 0.5 * np.cos(x), BlockDims(1, 1), 1.0, 64)
    zs = [0.5j, 1 + 1j, -2 + 0.3j]
    batch = propagate_batch(profile, zs)
    for k, z in enumerate(zs):
        np.testing.assert_allclose(batch[k], propagate(profile, z).u.samples, rtol=1e-13, atol=1e-14)


def test_real_z_conserves_j_form():
    profile = PotentialProfile.from_function(lambda x: [[0.4 * np.sin(3 * x), 0.2 + 0.1j]],
                                             BlockDims(1, 2), 2.0, 256)
    slice_ = propagate(profile, 1.7)
    assert np.max(conservation_residual(slice_, profile.dims)) <= 1e-10


def test_oracle_values():
    assert constant_potential_weyl_oracle(1.0, 1j) == pytest.approx(1j * (np.sqrt(2) - 1))
    assert abs(constant_potential_weyl_oracle(1.0, 10j)) == pytest.approx(np.sqrt(101) - 10)
    assert constant_potential_weyl_oracle(0.0, 1j) == 0
    with pytest.raises(GridError):
        constant_potential_weyl_oracle(1.0, 1.0)


def test_gram_has_off_diagonal_coupling():
    profile = PotentialProfile.constant(1.0, 4.0, 256)
    G = gram(profile, 1j, 4.0)
    np.testing.assert_allclose(G, G.conj().T, rtol=1e-12)
    assert abs(G[1, 0]) > 1e-3


@pytest.mark.parametrize("c, z", [
    (1.0, 1j), (1.0, 1 + 1j), (1.0, 2j),
    (0.5, 1j), (0.5, 1 + 1j), (0.5, 2j),
])
def test_weyl_point_matches_constant_oracle(c, z):
    profile = PotentialProfile.constant(c, 8.0, 4096)
    point = weyl_point(profile, z, b_schedule=(6.0, 7.0, 8.0), strict=False)
    assert abs(point.value[0, 0] - constant_potential_weyl_oracle(c, z)) <= 1e-5
    assert point.sigma_max < 1


def test_weyl_point_converges_for_fast_decay():
    profile = PotentialProfile.constant(1.0, 8.0, 512)
    point = weyl_point(profile, 1j, b_schedule=(6.0, 7.0, 8.0))
    assert point.converged
    assert len(point.increments) == 2


def test_weyl_point_reports_non_convergence():
    profile = PotentialProfile.constant(1.0, 1.0, 64)
    with pytest.raises(WeylConvergenceError) as info:
        weyl_point(profile, 5 + 0.05j, b_schedule=(0.25, 0.5), tol_weyl=1e-12)
    assert len(info.value.history) == 1


def test_weyl_point_requires_upper_half_plane():
    profile = PotentialProfile.constant(1.0, 1.0, 16)
    with pytest.raises(GridError):
        weyl_point(profile, 1.0)


def test_b_schedule_collapsing_to_one_node_is_rejected():
    # h = 1/16，两个 b 都落在第 16 个节点上
    profile = PotentialProfile.constant(1.0, 1.0, 16)
    with pytest.raises(GridError):
        weyl_point(profile, 1j, b_schedule=(1.0, 1.001))
    with pytest.raises(GridError):
        weyl_line(profile, 1.0, [0.0, 1.0], b_schedule=(0.99, 1.0))


def test_b_schedule_duplicates_are_dropped():
    profile = PotentialProfile.constant(1.0, 1.0, 16)
    point = weyl_point(profile, 1j, b_schedule=(0.5, 0.5, 1.0), strict=False)
    assert len(point.increments) == 1


def test_gram_rescaling_keeps_large_eta_b_finite():
    profile = PotentialProfile.constant(1.0, 4.0, 256)
    point = weyl_point(profile, 100j, b_schedule=(2.0, 3.0, 4.0), rescale=True)
    expected = constant_potential_weyl_oracle(1.0, 100j)
    assert abs(point.value[0, 0] - expected) <= 1e-8
    with pytest.raises(GramOverflowError):
        weyl_point(profile, 100j, b_schedule=(2.0, 3.0, 4.0), rescale=False)


def test_weyl_line_matches_oracle():
    profile = PotentialProfile.constant(1.0, 8.0, 512)
    w = weyl_line(profile, 1.0, [-1.0, 0.0, 1.0], b_schedule=(6.0, 7.0, 8.0))
    for k, zeta in enumerate(w.zeta):
        expected = constant_potential_weyl_oracle(1.0, zeta + 1j)
        assert abs(w.values[k, 0, 0] - expected) <= 1e-5
    assert not w.failures


def test_weyl_line_is_independent_of_thread_count():
    profile = PotentialProfile.from_function(lambda x: 0.6 * np.exp(-x), BlockDims(1, 1), 4.0, 64)
    zeta = zeta_grid(30.0, 600)
    calls = []
    one = weyl_line(profile, 1.0, zeta, b_schedule=(3.0, 4.0), threads=1,
                    progress=lambda done, total: calls.append((done, total)))
    three = weyl_line(profile, 1.0, zeta, b_schedule=(3.0, 4.0), threads=3)
    np.testing.assert_array_equal(one.values, three.values)
    np.testing.assert_array_equal(one.converged, three.converged)
    assert calls[-1] == (600, 600)
    assert len(calls) == 3


def test_weyl_line_refuses_overflow_without_rescaling():
    profile = PotentialProfile.constant(1.0, 8.0, 64)
    with pytest.raises(GramOverflowError):
        weyl_line(profile, 50.0, [0.0, 1.0], b_schedule=(7.0, 8.0), rescale=False)


def test_zero_potential_gives_zero_weyl_function():
    profile = PotentialProfile.constant(0.0, 4.0, 64)
    w = weyl_line(profile, 1.0, zeta_grid(10.0, 16), b_schedule=(3.0, 4.0))
    np.testing.assert_allclose(w.values, 0, atol=1e-14)
    assert w.is_symmetric()


def test_extend_potential():
    profile = PotentialProfile.constant(0.7, 2.0, 16)
    ext = extend_potential(profile, 6.0)
    assert ext.n == 48 and ext.L == pytest.approx(6.0)
    np.testing.assert_allclose(ext.v.samples[16:], 0)
    held = extend_potential(profile, 6.0, mode="hold")
    np.testing.assert_allclose(held.v.samples[16:], 0.7)
    with pytest.raises(GridError):
        extend_potential(profile, 1.0)
    with pytest.raises(GridError):
        extend_potential(profile, 4.0, mode="mirror")
