# -*- coding: utf-8 -*-
"""
基础类型：块维数、符号矩阵 j、网格函数、位势、块行对
以及 j-恒等式残差（各模块测试共用的判据）
"""
from dataclasses import dataclass, field

import numpy as np

from errors import GridError

NODE = "node"
MIDPOINT = "midpoint"


@dataclass(frozen=True)
class BlockDims:
    m1: int
    m2: int

    def __post_init__(self):
        if self.m1 < 1 or self.m2 < 1:
            raise GridError(f"块维数必须 ≥ 1: m1={self.m1}, m2={self.m2}")

    @property
    def m(self):
        return self.m1 + self.m2


@dataclass(frozen=True)
class SignatureMatrix:
    """j = diag(I_{m1}, -I_{m2})"""
    dims: BlockDims

    @property
    def matrix(self):
        return np.diag(np.r_[np.ones(self.dims.m1), -np.ones(self.dims.m2)]).astype(complex)


def signature(dims):
    return SignatureMatrix(dims).matrix


@dataclass(frozen=True, eq=False)
class GridFunction:
    """
    [0, L] 上等距网格采样的矩阵函数
    layout=node: n+1 个节点 x_i = i·h；layout=midpoint: n 个中点 (i+½)h
    """
    L: float
    n: int
    samples: np.ndarray
    layout: str = NODE

    def __post_init__(self):
        if self.n < 2:
            raise GridError(f"网格至少两个单元: n={self.n}")
        if not self.L > 0:
            raise GridError(f"区间长度必须为正: L={self.L}")
        if self.layout not in (NODE, MIDPOINT):
            raise GridError(f"未知网格布局: {self.layout}")
        samples = np.array(self.samples, dtype=complex)
        if samples.ndim != 3:
            raise GridError(f"采样必须是矩阵序列，实际形状 {samples.shape}")
        expected = self.n + 1 if self.layout == NODE else self.n
        if samples.shape[0] != expected:
            raise GridError(f"{self.layout} 网格需要 {expected} 个采样，实际 {samples.shape[0]}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def h(self):
        return self.L / self.n

    @property
    def shape(self):
        return self.samples.shape[1:]

    @property
    def x(self):
        if self.layout == NODE:
            return np.arange(self.n + 1) * self.h
        return (np.arange(self.n) + 0.5) * self.h

    def same_grid(self, other):
        return self.n == other.n and np.isclose(self.L, other.L, rtol=1e-12, atol=0.0)

    def prefix(self, k):
        """前 k 个单元上的限制"""
        if not 2 <= k <= self.n:
            raise GridError(f"前缀单元数越界: {k} (n={self.n})")
        count = k + 1 if self.layout == NODE else k
        return GridFunction(k * self.h, k, self.samples[:count], self.layout)


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """m1×m2 位势，中点采样，单元上分段常数"""
    dims: BlockDims
    v: GridFunction

    def __post_init__(self):
        if self.v.layout != MIDPOINT:
            raise GridError("位势必须按中点采样")
        if self.v.shape != (self.dims.m1, self.dims.m2):
            raise GridError(f"位势采样形状应为 {(self.dims.m1, self.dims.m2)}，实际 {self.v.shape}")

    @property
    def L(self):
        return self.v.L

    @property
    def n(self):
        return self.v.n

    @property
    def h(self):
        return self.v.h

    def V(self):
        """V = [[0, v], [v*, 0]]，每个单元一个 m×m 矩阵"""
        m1, m = self.dims.m1, self.dims.m
        out = np.zeros((self.n, m, m), dtype=complex)
        out[:, :m1, m1:] = self.v.samples
        out[:, m1:, :m1] = np.conj(np.swapaxes(self.v.samples, 1, 2))
        return out

    @classmethod
    def constant(cls, c, L, n):
        c = np.atleast_2d(np.asarray(c, dtype=complex))
        dims = BlockDims(*c.shape)
        return cls(dims, GridFunction(L, n, np.broadcast_to(c, (n,) + c.shape), MIDPOINT))

    @classmethod
    def from_function(cls, f, dims, L, n):
        """f(x) 在中点上取值，返回 m1×m2 矩阵（标量也可）"""
        x = (np.arange(n) + 0.5) * (L / n)
        samples = np.array([np.broadcast_to(np.asarray(f(xi), dtype=complex), (dims.m1, dims.m2))
                            for xi in x])
        return cls(dims, GridFunction(L, n, samples, MIDPOINT))


@dataclass(frozen=True, eq=False)
class BlockRowPair:
    """z=0 处基本解的两个块行：β (m1×m)、γ (m2×m)，节点采样"""
    dims: BlockDims
    beta: GridFunction
    gamma: GridFunction
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.beta.same_grid(self.gamma) or self.beta.layout != self.gamma.layout:
            raise GridError("β 与 γ 的网格不一致")
        if self.beta.shape != (self.dims.m1, self.dims.m):
            raise GridError(f"β 形状应为 {(self.dims.m1, self.dims.m)}，实际 {self.beta.shape}")
        if self.gamma.shape != (self.dims.m2, self.dims.m):
            raise GridError(f"γ 形状应为 {(self.dims.m2, self.dims.m)}，实际 {self.gamma.shape}")


def block_split(row, dims):
    """按列把 m_k×m 块行拆成 (m_k×m1, m_k×m2)"""
    row = np.asarray(row)
    if row.shape[-1] != dims.m:
        raise GridError(f"列数应为 m={dims.m}，实际 {row.shape[-1]}")
    return row[..., :dims.m1], row[..., dims.m1:]


def adjoint(a):
    """批量共轭转置"""
    return np.conj(np.swapaxes(a, -1, -2))


def spectral_norms(a):
    """每个矩阵的谱范数"""
    a = np.asarray(a)
    if a.size == 0:
        return np.zeros(a.shape[:-2])
    return np.linalg.norm(a, ord=2, axis=(-2, -1))


def grid_derivative(samples, h):
    """二阶中心差分，端点二阶单侧"""
    return np.gradient(np.asarray(samples), h, axis=0, edge_order=2)


def cell_means(node_samples):
    """节点值 → 单元平均"""
    node_samples = np.asarray(node_samples)
    return 0.5 * (node_samples[:-1] + node_samples[1:])


def cells_to_nodes(cell_samples, first):
    """
    单元值 → 节点值
    节点 0 给定；内部节点取相邻单元平均；末节点线性外推
    """
    cell_samples = np.asarray(cell_samples)
    out = np.empty((cell_samples.shape[0] + 1,) + cell_samples.shape[1:], dtype=complex)
    out[0] = first
    out[1:-1] = 0.5 * (cell_samples[:-1] + cell_samples[1:])
    out[-1] = 1.5 * cell_samples[-1] - 0.5 * cell_samples[-2]
    return out


def resample_midpoint(profile, n_new):
    """分段常数位势重采样到 n_new 个单元（长度不变）"""
    x_new = (np.arange(n_new) + 0.5) * (profile.L / n_new)
    idx = np.minimum((x_new / profile.h).astype(int), profile.n - 1)
    return PotentialProfile(profile.dims,
                            GridFunction(profile.L, n_new, profile.v.samples[idx], MIDPOINT))


def j_residual_curves(pair):
    """
    四条 j-恒等式残差曲线（每节点谱范数）：
    βjβ* − I, γjγ* + I, βjγ*, γ′jγ*
    """
    if pair.beta.layout != NODE:
        raise GridError("β、γ 需要节点采样")
    j = signature(pair.dims)
    beta = pair.beta.samples
    gamma = pair.gamma.samples
    eye1 = np.eye(pair.dims.m1)
    eye2 = np.eye(pair.dims.m2)
    gamma_prime = grid_derivative(gamma, pair.gamma.h)
    return {
        "beta_j_beta": spectral_norms(beta @ j @ adjoint(beta) - eye1),
        "gamma_j_gamma": spectral_norms(gamma @ j @ adjoint(gamma) + eye2),
        "beta_j_gamma": spectral_norms(beta @ j @ adjoint(gamma)),
        "gamma_prime_j_gamma": spectral_norms(gamma_prime @ j @ adjoint(gamma)),
    }


def j_residuals(pair):
    """四条残差曲线的网格上确界"""
    return {name: float(np.max(curve)) for name, curve in j_residual_curves(pair).items()}
