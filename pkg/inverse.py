# -*- coding: utf-8 -*-
"""
反问题：Φ₁ → γ、β → 位势 v

过程 A：H = γ_Φ*γ_Φ → Schur 系数 ψ → γ（ODE）→ β（ODE）→ v = iβ′jγ*
过程 B：β 直接由三角因子给出 → γ̂（ODE）→ v
过程 C：v = −i(EΦ₁′)*
"""
from dataclasses import dataclass, field

import numpy as np

from core_types import (MIDPOINT, NODE, BlockRowPair, GridFunction, PotentialProfile, adjoint,
                        block_split, cell_means, cells_to_nodes, grid_derivative,
                        j_residual_curves, signature, spectral_norms)
from errors import CharacterizationRejected, GridError, SingularityError, StageError, WeylError
from structured import (AccelerantKernel, apply_E, apply_E_adjoint_tail, assemble_S,
                        factorize, positivity)

# 误差与残差只在 [0, 0.9L] 上统计
TRIM = 0.9


@dataclass(frozen=True, eq=False)
class HamiltonianProfile:
    H: GridFunction
    secondary: GridFunction = None
    agreement: float = None


@dataclass(frozen=True, eq=False)
class SchurCoefficient:
    psi: GridFunction


@dataclass(eq=False)
class InversionResult:
    potential: PotentialProfile
    potentials: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


def _nodes(samples, L, n):
    return GridFunction(L, n, samples, NODE)


def _cells_of(phi):
    """[Φ₁ I] 的单元值（Φ₁ 取两端节点平均），形状 (n, m2, m)"""
    dims = phi.dims
    P = np.zeros((phi.n, dims.m2, dims.m), dtype=complex)
    P[:, :, :dims.m1] = cell_means(phi.phi1.samples)
    P[:, :, dims.m1:] = np.eye(dims.m2)
    return P


def _first_node(phi):
    dims = phi.dims
    first = np.zeros((dims.m2, dims.m), dtype=complex)
    first[:, :dims.m1] = phi.phi1.samples[0]
    first[:, dims.m1:] = np.eye(dims.m2)
    return first


def prepare_factor(phi):
    """整个 [0, L] 上的 S 与三角因子；S 不正定时报出首个失败的 ξ"""
    kernel = AccelerantKernel.from_profile(phi)
    S = assemble_S(kernel, phi.L)
    return S, factorize(S)


def _gamma_cells(phi, factor):
    return apply_E(factor, _cells_of(phi)).samples


def gamma_phi(phi, factor):
    """γ_Φ = E[Φ₁ I]，单元值映射回节点"""
    cells = _gamma_cells(phi, factor)
    return _nodes(cells_to_nodes(cells, _first_node(phi)), phi.L, phi.n)


def hamiltonian(phi, factor):
    """
    H = γ_Φ*γ_Φ（主算法，不求导）
    副算法：M_p = Π*S_p⁻¹Π = h Σ_{i<p} γc_i*γc_i，再做二阶差分
    """
    gamma = gamma_phi(phi, factor).samples
    H = adjoint(gamma) @ gamma

    cells = _gamma_cells(phi, factor)
    m = phi.dims.m
    M = np.zeros((phi.n + 1, m, m), dtype=complex)
    M[1:] = phi.h * np.cumsum(adjoint(cells) @ cells, axis=0)
    secondary = grid_derivative(M, phi.h)
    agreement = float(np.max(spectral_norms(secondary - H)))
    return HamiltonianProfile(_nodes(H, phi.L, phi.n), _nodes(secondary, phi.L, phi.n), agreement)


def _guard_definite(mats, guard, stage, what):
    """mats 每个节点的最小特征值 ≥ guard，否则报节点号"""
    lam = np.linalg.eigvalsh(0.5 * (mats + adjoint(mats)))[:, 0]
    bad = np.flatnonzero(lam < guard)
    if bad.size:
        k = int(bad[0])
        raise SingularityError(f"{what} 失去正定性（最小特征值 {lam[k]:.3e}）", stage=stage, node=k)


def _guard_invertible(mats, guard, stage, what):
    sv = np.linalg.svd(mats, compute_uv=False)[:, -1]
    bad = np.flatnonzero(sv < guard)
    if bad.size:
        k = int(bad[0])
        raise SingularityError(f"{what} 接近奇异（最小奇异值 {sv[k]:.3e}）", stage=stage, node=k)


def schur_coefficient(ham, dims, guard=1e-8):
    """ψ = H₂₂⁻¹H₂₁"""
    m1 = dims.m1
    H = ham.H.samples
    H21, H22 = block_split(H[:, m1:, :], dims)
    _guard_definite(H22, guard, "schur_coefficient", "H₂₂")
    psi = np.linalg.solve(H22, H21)
    m2 = H22.shape[-1]
    _guard_definite(np.eye(m2) - psi @ adjoint(psi), guard, "schur_coefficient", "I − ψψ*")
    return SchurCoefficient(_nodes(psi, ham.H.L, ham.H.n))


def _right_midpoint(F, h, size):
    """Y′ = Y F，Y(0) = I，显式中点法"""
    Y = np.empty((F.shape[0], size, size), dtype=complex)
    Y[0] = np.eye(size)
    for k in range(F.shape[0] - 1):
        half = Y[k] + 0.5 * h * Y[k] @ F[k]
        Y[k + 1] = Y[k] + h * half @ (0.5 * (F[k] + F[k + 1]))
    return Y


def _schur_driver(c, h, guard, stage):
    """c′c*(I − cc*)⁻¹"""
    m2 = c.shape[1]
    defect = np.eye(m2) - c @ adjoint(c)
    _guard_definite(defect, guard, stage, "I − cc*")
    c_prime = grid_derivative(c, h)
    return adjoint(np.linalg.solve(adjoint(defect), adjoint(c_prime @ adjoint(c))))


def gamma_from_schur(schur, guard=1e-8):
    """γ₂′ = γ₂ψ′ψ*(I − ψψ*)⁻¹，γ₂(0) = I，γ₁ = γ₂ψ"""
    psi = schur.psi.samples
    h = schur.psi.h
    F = _schur_driver(psi, h, guard, "gamma_from_schur")
    g2 = _right_midpoint(F, h, psi.shape[1])
    gamma = np.concatenate([g2 @ psi, g2], axis=2)
    return _nodes(gamma, schur.psi.L, schur.psi.n)


def beta_from_gamma(gamma, dims, guard=1e-8):
    """
    β̃ = [I ψ*]，ψ = γ₂⁻¹γ₁；β₁′ = −β₁(β̃′jβ̃*)(β̃jβ̃*)⁻¹，β₁(0) = I；β = β₁β̃
    """
    m1 = dims.m1
    g = gamma.samples
    g1, g2 = block_split(g, dims)
    _guard_invertible(g2, guard, "beta_from_gamma", "γ₂")
    psi = np.linalg.solve(g2, g1)
    tilde = np.concatenate([np.broadcast_to(np.eye(m1), (g.shape[0], m1, m1)), adjoint(psi)], axis=2)
    j = signature(dims)
    tilde_prime = grid_derivative(tilde, gamma.h)
    B = tilde @ j @ adjoint(tilde)
    _guard_definite(B, guard, "beta_from_gamma", "β̃jβ̃*")
    Bp = tilde_prime @ j @ adjoint(tilde)
    G = -adjoint(np.linalg.solve(adjoint(B), adjoint(Bp)))
    b1 = _right_midpoint(G, gamma.h, m1)
    return _nodes(b1 @ tilde, gamma.L, gamma.n)


def beta_direct(phi, factor, via="factor"):
    """
    β(x_p) = [I 0] + h Σ_{t<p} (S_p⁻¹Φ₁′)(t)* [Φ₁ I]_t
    via="factor" 用 (EΦ₁′)*γc，via="tail" 逐前缀应用 S_p⁻¹
    """
    dims = phi.dims
    q = phi.phi1_prime.samples
    start = np.zeros((dims.m1, dims.m), dtype=complex)
    start[:, :dims.m1] = np.eye(dims.m1)
    beta = np.empty((phi.n + 1, dims.m1, dims.m), dtype=complex)
    beta[0] = start
    if via == "factor":
        Eq = apply_E(factor, q).samples
        cells = _gamma_cells(phi, factor)
        beta[1:] = start + phi.h * np.cumsum(adjoint(Eq) @ cells, axis=0)
    elif via == "tail":
        Y = apply_E_adjoint_tail(factor, q)
        P = _cells_of(phi)
        for p in range(1, phi.n + 1):
            beta[p] = start + phi.h * np.sum(adjoint(Y[p - 1, :p]) @ P[:p], axis=0)
    else:
        raise GridError(f"未知的 via: {via}")
    return _nodes(beta, phi.L, phi.n)


def gamma_hat_pnv(beta, dims, guard=1e-8):
    """
    γ̃₁ = (β₁⁻¹β₂)*；γ̂₂′ = γ̂₂γ̃₁′γ̃₁*(I − γ̃₁γ̃₁*)⁻¹，γ̂₂(0) = I；γ̂ = γ̂₂[γ̃₁ I]
    """
    b = beta.samples
    b1, b2 = block_split(b, dims)
    _guard_invertible(b1, guard, "gamma_hat", "β₁")
    tilde1 = adjoint(np.linalg.solve(b1, b2))
    F = _schur_driver(tilde1, beta.h, guard, "gamma_hat")
    m2 = tilde1.shape[1]
    g2 = _right_midpoint(F, beta.h, m2)
    rows = np.concatenate([tilde1, np.broadcast_to(np.eye(m2), (b.shape[0], m2, m2))], axis=2)
    return _nodes(g2 @ rows, beta.L, beta.n)


def potential_from(beta, gamma, dims):
    """v = iβ′jγ*，中点上 β′ 用差商、γ 取两端平均"""
    if not beta.same_grid(gamma):
        raise GridError("β 与 γ 的网格不一致")
    j = signature(dims)
    b = beta.samples
    db = (b[1:] - b[:-1]) / beta.h
    g_mid = cell_means(gamma.samples)
    v = 1j * db @ j @ adjoint(g_mid)
    return PotentialProfile(dims, GridFunction(beta.L, beta.n, v, MIDPOINT))


def potential_fast(phi, factor):
    """v = −i(EΦ₁′)*"""
    Eq = apply_E(factor, phi.phi1_prime.samples).samples
    v = -1j * adjoint(Eq)
    return PotentialProfile(phi.dims, GridFunction(phi.L, phi.n, v, MIDPOINT))


def fundamental_residuals(pair):
    """u = [β; γ]：u j u* − j 的逐节点谱范数，以及 ‖u(0) − I‖"""
    u = np.concatenate([pair.beta.samples, pair.gamma.samples], axis=1)
    j = signature(pair.dims)
    curve = spectral_norms(u @ j @ adjoint(u) - j)
    start = float(np.linalg.norm(u[0] - np.eye(pair.dims.m), 2))
    return curve, start


def trimmed_count(n, count):
    """[0, 0.9L] 内的采样个数：n+1 个节点或 n 个中点"""
    if count == n + 1:
        return int(np.floor(TRIM * n + 1e-9)) + 1
    return int(np.floor(TRIM * n - 0.5 + 1e-9)) + 1


def _trimmed_max(curve, n):
    curve = np.asarray(curve)
    return float(np.max(curve[:trimmed_count(n, curve.shape[0])]))


def _residual_summary(curves, n):
    return {name: {"max": float(np.max(c)), "max_trimmed": _trimmed_max(c, n)}
            for name, c in curves.items()}


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (WeylError, np.linalg.LinAlgError) as e:
        if isinstance(e, StageError):
            raise
        raise StageError(name, e)


def invert_phi1(phi, procedure="all", guard=1e-8, eps_pos=None, progress=None):
    """Φ₁ → v，过程 A/B/C/all；all 时以 A 的结果为主输出"""
    if procedure not in ("A", "B", "C", "all"):
        raise GridError(f"未知的反演过程: {procedure}")
    dims, n, h = phi.dims, phi.n, phi.h
    m1 = dims.m1
    steps = {"A": 4, "B": 2, "C": 1, "all": 7}[procedure] + 1
    done = [0]

    def tick():
        done[0] += 1
        if progress:
            progress(done[0], steps)

    S, factor = _stage("factorize", prepare_factor, phi)
    min_eig, _ = positivity(S, eps_pos)
    tick()
    diagnostics = {"min_eig_S": min_eig, "residuals": {}, "deltas": {}}
    potentials = {}
    curves = {}

    gamma_f = gamma_phi(phi, factor)
    beta_f = _stage("beta_direct", beta_direct, phi, factor)
    pair_f = BlockRowPair(dims, beta_f, gamma_f)
    j = signature(dims)
    g = gamma_f.samples
    b = beta_f.samples
    curves["c0_gamma_j_gamma"] = spectral_norms(g @ j @ adjoint(g) + np.eye(dims.m2))
    curves["c12_gamma_j_beta"] = spectral_norms(g @ j @ adjoint(b))
    curves["c16_beta_j_beta"] = spectral_norms(b @ j @ adjoint(b) - np.eye(m1))
    curves["c5_beta_prime_j_beta"] = spectral_norms(grid_derivative(b, h) @ j @ adjoint(b))
    curves["u_j_u_factor"], start = fundamental_residuals(pair_f)
    diagnostics["u_at_zero"] = start

    if procedure in ("A", "all"):
        ham = _stage("hamiltonian", hamiltonian, phi, factor)
        diagnostics["hamiltonian_agreement"] = ham.agreement
        tick()
        schur = _stage("schur_coefficient", schur_coefficient, ham, dims, guard)
        diagnostics["psi_sigma_max"] = float(np.max(spectral_norms(schur.psi.samples)))
        tick()
        gamma_a = _stage("gamma_from_schur", gamma_from_schur, schur, guard)
        tick()
        beta_a = _stage("beta_from_gamma", beta_from_gamma, gamma_a, dims, guard)
        tick()
        pair_a = BlockRowPair(dims, beta_a, gamma_a)
        for name, c in j_residual_curves(pair_a).items():
            curves[f"A_{name}"] = c
        potentials["A"] = potential_from(beta_a, gamma_a, dims)
        diagnostics["gamma_A_vs_gamma_phi"] = float(np.max(spectral_norms(gamma_a.samples - g)))

    if procedure in ("B", "all"):
        gamma_hat = _stage("gamma_hat", gamma_hat_pnv, beta_f, dims, guard)
        tick()
        bh = gamma_hat.samples
        curves["b2_gamma_hat_prime_j_gamma_hat"] = spectral_norms(
            grid_derivative(bh, h) @ j @ adjoint(bh))
        curves["b2_gamma_hat_j_beta"] = spectral_norms(bh @ j @ adjoint(b))
        for name, c in j_residual_curves(BlockRowPair(dims, beta_f, gamma_hat)).items():
            curves[f"B_{name}"] = c
        potentials["B"] = potential_from(beta_f, gamma_hat, dims)
        diagnostics["gamma_hat_vs_gamma_phi"] = float(np.max(spectral_norms(bh - g)))
        tick()

    if procedure in ("C", "all"):
        potentials["C"] = _stage("potential_fast", potential_fast, phi, factor)
        tick()

    names = sorted(potentials)
    for i, p in enumerate(names):
        for q in names[i + 1:]:
            diff = potentials[p].v.samples - potentials[q].v.samples
            diagnostics["deltas"][f"{p}-{q}"] = _trimmed_max(spectral_norms(diff), n)
    if "A" in potentials and "B" in potentials:
        diagnostics["beta_A_vs_beta_direct"] = float(np.max(spectral_norms(beta_a.samples - b)))

    diagnostics["residuals"] = _residual_summary(curves, n)
    diagnostics["curves"] = {name: np.asarray(c).tolist() for name, c in curves.items()}
    main = potentials["A"] if "A" in potentials else potentials[names[0]]
    return InversionResult(main, potentials, diagnostics)


def invert(w, L, n, procedure="all", config=None, progress=None):
    """Weyl 采样 → 位势；默认先做特征刻画，未通过时抛 CharacterizationRejected（force 跳过）"""
    from characterize import check
    from config import RunConfig
    from transform import weyl_transform

    config = config or RunConfig(L=L, n=n)
    report = None
    if not config.force:
        report = check(w, L, n, config=config)
        if not report.accepted:
            raise CharacterizationRejected(report)
    phi = _stage("transform", weyl_transform, w, L, n, config.taper, config.tail_correction)
    result = invert_phi1(phi, procedure, guard=config.singular_guard,
                         eps_pos=config.eps_pos_scale * n * w.dims.m2, progress=progress)
    result.diagnostics["transform"] = phi.diagnostics
    if report is not None:
        result.diagnostics["characterization"] = report.to_dict()
    return result
