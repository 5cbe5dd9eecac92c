# -*- coding: utf-8 -*-
"""
正问题：位势 v → 基本解 u(x,z) → Weyl 函数 φ(z)

单元上冻结系数 A = zj + jV，A² = diag(z² − vv*, z² − v*v)，
所以 exp(ihA) = C + i·S·A，C、S 是 A² 的整函数，用 vv*、v*v 的 eigh 求值
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from core_types import (MIDPOINT, NODE, BlockRowPair, GridFunction, PotentialProfile,
                        adjoint, signature, spectral_norms)
from errors import (GramOverflowError, GridError, IntegrationError, SingularityError,
                    WeylConvergenceError)

# 每个工作块的谱点数，固定分块保证结果与线程数无关
CHUNK = 256
# 重标定触发阈值（|u| 的最大元素）
RESCALE_AT = 1e50


@dataclass(frozen=True, eq=False)
class FundamentalSolutionSlice:
    z: complex
    u: GridFunction


@dataclass(frozen=True, eq=False)
class WeylPoint:
    z: complex
    value: np.ndarray
    converged: bool
    increments: tuple
    sigma_max: float


@dataclass(frozen=True, eq=False)
class WeylSamples:
    """φ(ζ_k + iη) 在对称 ζ 网格上的采样"""
    dims: object
    eta: float
    zeta: np.ndarray
    values: np.ndarray
    converged: np.ndarray = None
    increments: np.ndarray = None
    failures: list = field(default_factory=list)

    def __post_init__(self):
        zeta = np.asarray(self.zeta, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if zeta.ndim != 1 or zeta.size < 2:
            raise GridError("ζ 网格至少需要两个点")
        if values.shape != (zeta.size, self.dims.m2, self.dims.m1):
            raise GridError(f"φ 采样形状应为 {(zeta.size, self.dims.m2, self.dims.m1)}，实际 {values.shape}")
        if not self.eta > 0:
            raise GridError(f"η 必须为正: {self.eta}")
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "values", values)
        if self.converged is None:
            object.__setattr__(self, "converged", np.ones(zeta.size, dtype=bool))
        if self.increments is None:
            object.__setattr__(self, "increments", np.zeros(zeta.size))

    @property
    def a(self):
        return float(self.zeta[-1])

    @property
    def dzeta(self):
        return float(self.zeta[1] - self.zeta[0])

    @property
    def z(self):
        return self.zeta + 1j * self.eta

    def sigma_max(self):
        return spectral_norms(self.values)

    def is_symmetric(self, rtol=1e-9):
        steps = np.diff(self.zeta)
        return (np.allclose(self.zeta, -self.zeta[::-1], atol=rtol * self.a)
                and np.allclose(steps, steps[0], rtol=1e-6))


def zeta_grid(a, nz):
    """[−a, a] 上的对称等距 ζ 网格"""
    return np.linspace(-a, a, nz)


def _cell_spectra(profile):
    """vv* 与 v*v 的特征分解，与 z 无关，整条谱线只算一次"""
    v = profile.v.samples
    mu1, U1 = np.linalg.eigh(v @ adjoint(v))
    mu2, U2 = np.linalg.eigh(adjoint(v) @ v)
    return mu1, U1, mu2, U2


def _entire_pair(mu, U, z, h):
    """C = cos(h√W)、S = sin(h√W)/√W，W = z² − U diag(μ) U*"""
    w = z[:, None, None] ** 2 - mu[None, :, :]
    root = np.sqrt(w)
    c = np.cos(h * root)
    s = h * np.sinc(h * root / np.pi)
    Uh = adjoint(U)
    C = (U[None] * c[..., None, :]) @ Uh[None]
    S = (U[None] * s[..., None, :]) @ Uh[None]
    return C, S


def cell_propagators(profile, zs, spectra=None, count=None):
    """
    每个单元的 exp(ihA)，形状 (len(zs), count, m, m)
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    dims = profile.dims
    m1, m = dims.m1, dims.m
    count = profile.n if count is None else count
    mu1, U1, mu2, U2 = spectra or _cell_spectra(profile)
    mu1, U1, mu2, U2 = mu1[:count], U1[:count], mu2[:count], U2[:count]
    h = profile.h
    C1, S1 = _entire_pair(mu1, U1, zs, h)
    C2, S2 = _entire_pair(mu2, U2, zs, h)

    A = np.zeros((zs.size, count, m, m), dtype=complex)
    v = profile.v.samples[:count]
    A[:, :, :m1, :m1] = zs[:, None, None, None] * np.eye(m1)
    A[:, :, m1:, m1:] = -zs[:, None, None, None] * np.eye(dims.m2)
    A[:, :, :m1, m1:] = v[None]
    A[:, :, m1:, :m1] = -adjoint(v)[None]

    P = np.zeros_like(A)
    P[:, :, :m1, :m1] = C1
    P[:, :, m1:, m1:] = C2
    P[:, :, :m1, :] += 1j * S1 @ A[:, :, :m1, :]
    P[:, :, m1:, :] += 1j * S2 @ A[:, :, m1:, :]
    return P


def propagate_batch(profile, zs):
    """多个谱点同时积分，返回 (len(zs), n+1, m, m)"""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    P = cell_propagators(profile, zs)
    m = profile.dims.m
    u = np.empty((zs.size, profile.n + 1, m, m), dtype=complex)
    u[:, 0] = np.eye(m)
    for i in range(profile.n):
        u[:, i + 1] = P[:, i] @ u[:, i]
    if not np.all(np.isfinite(u)):
        bad = int(np.argmax(~np.all(np.isfinite(u), axis=(0, 2, 3))))
        raise IntegrationError("基本解出现 NaN/Inf", stage="propagate", node=bad)
    return u


def propagate(profile, z):
    """单个谱点的基本解 u(x_i, z)，u(0, z) = I"""
    u = propagate_batch(profile, [z])[0]
    return FundamentalSolutionSlice(complex(z), GridFunction(profile.L, profile.n, u, NODE))


def block_rows_at_zero(profile):
    """u(x, 0) 的块行 β、γ（正问题给出的反问题参照解）"""
    u = propagate(profile, 0.0).u
    m1 = profile.dims.m1
    beta = GridFunction(profile.L, profile.n, u.samples[:, :m1, :], NODE)
    gamma = GridFunction(profile.L, profile.n, u.samples[:, m1:, :], NODE)
    return BlockRowPair(profile.dims, beta, gamma, {"source": "direct"})


def extend_potential(profile, length, mode="zero"):
    """把位势延拓到 [0, length]，zero 补零，hold 延用最后一个单元的值"""
    if mode not in ("zero", "hold"):
        raise GridError(f"未知延拓方式: {mode}")
    n_new = int(round(length / profile.h))
    if n_new < profile.n:
        raise GridError(f"延拓长度 {length} 小于原长度 {profile.L}")
    if n_new == profile.n:
        return profile
    v = profile.v.samples
    pad_value = v[-1] if mode == "hold" else np.zeros_like(v[-1])
    samples = np.concatenate([v, np.broadcast_to(pad_value, (n_new - profile.n,) + v.shape[1:])])
    return PotentialProfile(profile.dims, GridFunction(n_new * profile.h, n_new, samples, MIDPOINT))


def _b_nodes(profile, b_schedule, minimum=1):
    """b 取整到网格节点，去重后升序；不同节点少于 minimum 个时报错"""
    nodes = set()
    for b in b_schedule:
        k = max(1, int(round(b / profile.h)))
        if k > profile.n:
            raise GridError(f"b={b} 超出位势区间 [0, {profile.L}]")
        nodes.add(k)
    if len(nodes) < minimum:
        raise GridError(f"b_schedule {tuple(b_schedule)} 在步长 h={profile.h:.3g} 下只落在 "
                        f"{len(nodes)} 个不同节点上，至少需要 {minimum} 个")
    return sorted(nodes)


def default_b_schedule(profile):
    return (profile.L / 4, profile.L / 2, profile.L)


def _check_overflow(eta, b_max, rescale, eta_b_cap):
    if eta * b_max > eta_b_cap and not rescale:
        raise GramOverflowError(
            f"η·b = {eta * b_max:.1f} 超过上限 {eta_b_cap}，请减小 b 或开启重标定",
            stage="gram")


def _gram_march(profile, zs, b_nodes, spectra=None, rescale=True, eta_b_cap=300.0):
    """
    沿网格推进 u 并累加梯形 Gram，在每个 b 节点记录 G
    返回 (len(b_nodes), len(zs), m, m)；重标定后 G 相差正的标量因子
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    eta_max = float(np.max(zs.imag))
    h = profile.h
    active = rescale and eta_max * b_nodes[-1] * h > eta_b_cap
    _check_overflow(eta_max, b_nodes[-1] * h, rescale, eta_b_cap)

    P = cell_propagators(profile, zs, spectra=spectra, count=b_nodes[-1])
    m = profile.dims.m
    u = np.broadcast_to(np.eye(m, dtype=complex), (zs.size, m, m)).copy()
    G = np.zeros_like(u)
    uu = adjoint(u) @ u
    grams = []
    targets = set(b_nodes)
    for i in range(b_nodes[-1]):
        u = P[:, i] @ u
        uu_next = adjoint(u) @ u
        G += 0.5 * h * (uu + uu_next)
        uu = uu_next
        if active:
            scale = np.max(np.abs(u), axis=(1, 2))
            big = scale > RESCALE_AT
            if np.any(big):
                factor = np.where(big, scale, 1.0)
                u /= factor[:, None, None]
                uu /= (factor ** 2)[:, None, None]
                G /= (factor ** 2)[:, None, None]
        if not np.all(np.isfinite(G)):
            raise IntegrationError("Gram 矩阵溢出或出现 NaN", stage="gram", node=i + 1)
        if i + 1 in targets:
            grams.append(G.copy())
    return np.array(grams)


def gram(profile, z, b, rescale=True, eta_b_cap=300.0):
    """G(b, z) = ∫₀ᵇ u*u dx（梯形求积）"""
    z = complex(z)
    if not z.imag > 0:
        raise GridError(f"gram 需要 Im z > 0: z={z}")
    return _gram_march(profile, [z], _b_nodes(profile, [b]),
                       rescale=rescale, eta_b_cap=eta_b_cap)[0, 0]


def _minimizers(grams, m1):
    """φ_b = −G22⁻¹ G21，批量"""
    G22 = grams[..., m1:, m1:]
    G21 = grams[..., m1:, :m1]
    return -np.linalg.solve(G22, G21)


def _check_g22(grams, m1):
    G22 = grams[..., m1:, m1:]
    lam = np.linalg.eigvalsh(0.5 * (G22 + adjoint(G22)))
    if np.any(lam[..., 0] <= 0):
        raise SingularityError("G₂₂ 数值奇异", stage="weyl_point")


def _weyl_batch(profile, zs, b_schedule, tol_weyl, spectra=None, rescale=True, eta_b_cap=300.0):
    """返回 (values, converged, last_increment, increment_history)"""
    b_nodes = _b_nodes(profile, b_schedule, minimum=2)
    grams = _gram_march(profile, zs, b_nodes, spectra, rescale, eta_b_cap)
    _check_g22(grams, profile.dims.m1)
    phis = _minimizers(grams, profile.dims.m1)
    increments = np.linalg.norm(np.diff(phis, axis=0), axis=(-2, -1))
    values = phis[-1]
    last = increments[-1]
    return values, last < tol_weyl, last, increments.T


def weyl_point(profile, z, b_schedule=None, tol_weyl=1e-6, tol_contr=1e-8,
               rescale=True, eta_b_cap=300.0, strict=True):
    """
    截断极小化 φ_b = −G₂₂(b,z)⁻¹G₂₁(b,z)，沿 b_schedule 检查 Frobenius 增量
    strict=True 时不收敛抛 WeylConvergenceError
    """
    z = complex(z)
    if not z.imag > 0:
        raise GridError(f"weyl_point 需要 Im z > 0: z={z}")
    b_schedule = tuple(b_schedule or default_b_schedule(profile))
    if len(b_schedule) < 2:
        raise GridError("b_schedule 至少需要两个长度")
    values, converged, last, history = _weyl_batch(
        profile, [z], b_schedule, tol_weyl, rescale=rescale, eta_b_cap=eta_b_cap)
    value = values[0]
    if strict and not converged[0]:
        raise WeylConvergenceError(
            f"φ 未收敛: 最后增量 {last[0]:.3e} ≥ {tol_weyl:.1e}", history[0], z=z)
    return WeylPoint(z, value, bool(converged[0]), tuple(history[0]),
                     float(spectral_norms(value[None])[0]))


def weyl_line(profile, eta, zeta, b_schedule=None, tol_weyl=1e-6, rescale=True,
              eta_b_cap=300.0, threads=1, progress=None):
    """
    水平线 ζ + iη 上的 Weyl 函数采样
    固定大小分块，可多线程；progress(done, total) 为进度回调
    """
    zeta = np.asarray(zeta, dtype=float)
    b_schedule = tuple(b_schedule or default_b_schedule(profile))
    if len(b_schedule) < 2:
        raise GridError("b_schedule 至少需要两个长度")
    _b_nodes(profile, b_schedule, minimum=2)
    _check_overflow(eta, max(b_schedule), rescale, eta_b_cap)
    spectra = _cell_spectra(profile)
    chunks = [slice(s, min(s + CHUNK, zeta.size)) for s in range(0, zeta.size, CHUNK)]

    dims = profile.dims
    values = np.zeros((zeta.size, dims.m2, dims.m1), dtype=complex)
    converged = np.zeros(zeta.size, dtype=bool)
    increments = np.full(zeta.size, np.inf)
    failures = []

    def work(sl):
        return _weyl_batch(profile, zeta[sl] + 1j * eta, b_schedule, tol_weyl,
                           spectra, rescale, eta_b_cap)

    done = 0
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [(sl, pool.submit(work, sl)) for sl in chunks]
        for sl, fut in futures:
            try:
                vals, conv, last, _ = fut.result()
                values[sl] = vals
                converged[sl] = conv
                increments[sl] = last
            except (IntegrationError, SingularityError) as e:
                failures.append({"zeta_from": float(zeta[sl.start]),
                                 "zeta_to": float(zeta[sl.stop - 1]),
                                 "error": str(e)})
            done += sl.stop - sl.start
            if progress:
                progress(done, zeta.size)

    return WeylSamples(dims, float(eta), zeta, values, converged, increments, failures)


def constant_potential_weyl_oracle(c, z):
    """
    常位势（标量）的 Weyl 函数：φ = (λ − iz)/(ic)，λ² = |c|² − z²，Re λ < 0
    """
    c = np.asarray(c, dtype=complex)
    if c.size != 1:
        raise GridError("常位势参照解只支持 m1 = m2 = 1")
    c = complex(c.reshape(()))
    z = complex(z)
    if not z.imag > 0:
        raise GridError(f"参照解需要 Im z > 0: z={z}")
    if c == 0:
        return 0j
    lam = -np.sqrt(abs(c) ** 2 - z ** 2)
    return complex((lam - 1j * z) / (1j * c))


def conservation_residual(slice_, dims):
    """u*ju − j 的逐节点谱范数（实 z 时应为舍入量级）"""
    j = signature(dims)
    u = slice_.u.samples
    return spectral_norms(adjoint(u) @ j @ u - j)
