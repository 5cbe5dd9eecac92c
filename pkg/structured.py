# -*- coding: utf-8 -*-
"""
结构算子 S_ξ = I − L_T L_T*，算子恒等式残差，正定性，块三角分解 S⁻¹ = E*E

单元 [ih, (i+1)h) 上取单元值，矩阵里已含求积权 h
L_T 是卷积 g ↦ ∫₀ˣ Φ₁′(x−r) g(r) dr 的单元投影：
    (i, i) 块 = h·q₀/2，(i, k) 块 = h·(q_{i−k−1} + q_{i−k})/2，i > k
这里用单元投影的 Galerkin 权重，不用（正交归一基下的）中点规则 √h·q_{i−k}
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag, solve, solve_triangular, sqrtm

from core_types import MIDPOINT, GridFunction, adjoint
from errors import GridError, NotPositiveDefiniteError

# 幂迭代步数
POWER_STEPS = 20


@dataclass(frozen=True, eq=False)
class AccelerantKernel:
    """Φ₁′ 的中点采样 q_k（m2×m1）"""
    dims: object
    q: np.ndarray
    h: float

    def __post_init__(self):
        q = np.asarray(self.q, dtype=complex)
        if q.ndim != 3 or q.shape[1:] != (self.dims.m2, self.dims.m1):
            raise GridError(f"加速核采样形状应为 (n, {self.dims.m2}, {self.dims.m1})，实际 {q.shape}")
        if not np.all(np.isfinite(q)):
            raise GridError("加速核含 NaN/Inf")
        object.__setattr__(self, "q", q)

    @property
    def n(self):
        return self.q.shape[0]

    @classmethod
    def from_profile(cls, phi):
        return cls(phi.dims, phi.phi1_prime.samples, phi.h)

    def prefix_l2(self):
        """前缀 L² 范数，单调不减"""
        sq = np.sum(np.abs(self.q) ** 2, axis=(1, 2))
        return np.sqrt(self.h * np.cumsum(sq))


@dataclass(frozen=True, eq=False)
class DiscreteS:
    n: int
    m2: int
    h: float
    matrix: np.ndarray

    @property
    def xi(self):
        return self.n * self.h

    def block(self, i, k):
        m2 = self.m2
        return self.matrix[i * m2:(i + 1) * m2, k * m2:(k + 1) * m2]

    def blocks(self):
        """n×n 个 m2×m2 块"""
        return self.matrix.reshape(self.n, self.m2, self.n, self.m2).swapaxes(1, 2)

    def leading(self, k):
        size = k * self.m2
        return DiscreteS(k, self.m2, self.h, self.matrix[:size, :size])


@dataclass(frozen=True, eq=False)
class TriangularFactor:
    """S = C C*，E = C⁻¹，都是块下三角，对角块 Hermite 正定"""
    n: int
    m2: int
    h: float
    C: np.ndarray
    E: np.ndarray

    def leading(self, k):
        size = k * self.m2
        return TriangularFactor(k, self.m2, self.h, self.C[:size, :size], self.E[:size, :size])

    def diagonal_deviation(self):
        """max ‖E_kk − I‖，随 h → 0 趋于 0"""
        m2 = self.m2
        eye = np.eye(m2)
        return max(float(np.linalg.norm(self.E[k * m2:(k + 1) * m2, k * m2:(k + 1) * m2] - eye, 2))
                   for k in range(self.n))


def cells_on_grid(xi, h, n):
    """ξ 对应的单元数，ξ 必须落在网格上"""
    k = int(round(xi / h))
    if abs(k * h - xi) > 1e-9 * max(1.0, abs(xi)) or not 1 <= k <= n:
        raise GridError(f"ξ={xi} 不在网格上（h={h}, n={n}）")
    return k


def lower_toeplitz(kernel, k):
    """L_T，形状 (k·m2, k·m1)"""
    q = kernel.q[:k]
    h = kernel.h
    coeff = np.empty_like(q)
    coeff[0] = 0.5 * h * q[0]
    coeff[1:] = 0.5 * h * (q[:-1] + q[1:])
    lag = np.subtract.outer(np.arange(k), np.arange(k))
    blocks = np.where((lag >= 0)[:, :, None, None], coeff[np.clip(lag, 0, None)], 0)
    m2, m1 = q.shape[1:]
    return blocks.swapaxes(1, 2).reshape(k * m2, k * m1)


def assemble_S(kernel, xi):
    """S_ξ = I − L_T L_T*，按 (K + K*)/2 对称化"""
    k = cells_on_grid(xi, kernel.h, kernel.n)
    L = lower_toeplitz(kernel, k)
    K = L @ adjoint(L)
    K = 0.5 * (K + adjoint(K))
    m2 = kernel.dims.m2
    return DiscreteS(k, m2, kernel.h, np.eye(k * m2) - K)


def default_eps_pos(S):
    return 1e-10 * S.n * S.m2


def positivity(S, eps_pos=None):
    """(最小特征值, 是否 > eps_pos)"""
    eps_pos = default_eps_pos(S) if eps_pos is None else eps_pos
    min_eig = float(np.linalg.eigvalsh(S.matrix)[0])
    return min_eig, min_eig > eps_pos


def min_eigenvalue_sweep(S, counts):
    """嵌套前导块的最小特征值"""
    m2 = S.m2
    return np.array([np.linalg.eigvalsh(S.matrix[:c * m2, :c * m2])[0] for c in counts])


def _integration_operator(k, m2, h):
    """A = −i·h·T，T 下三角、对角 ½、下方 1"""
    T = np.tril(np.ones((k, k)), -1) + 0.5 * np.eye(k)
    return -1j * h * np.kron(T, np.eye(m2))


def _power_norm(R):
    x = np.ones(R.shape[1], dtype=complex)
    x /= np.linalg.norm(x)
    for _ in range(POWER_STEPS):
        y = adjoint(R) @ (R @ x)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        x = y / nrm
    return float(np.linalg.norm(R @ x))


def identity_residual(kernel, phi1_nodes, xi):
    """
    ‖A S − S A* − iΠjΠ*‖（幂迭代估计）
    Π 在每个单元取右端节点的 [Φ₁ I]
    """
    phi1_nodes = np.asarray(phi1_nodes, dtype=complex)
    if phi1_nodes.shape[0] != kernel.n + 1 or phi1_nodes.shape[1:] != kernel.q.shape[1:]:
        raise GridError("Φ₁ 节点采样与加速核网格不一致")
    S = assemble_S(kernel, xi)
    k, m2, h = S.n, S.m2, S.h
    A = _integration_operator(k, m2, h)

    P = phi1_nodes[1:k + 1]
    PP = np.einsum("iab,kcb->iakc", P, np.conj(P)).reshape(k * m2, k * m2)
    pi_j_pi = 1j * h * (PP - np.kron(np.ones((k, k)), np.eye(m2)))

    R = A @ S.matrix - S.matrix @ adjoint(A) - pi_j_pi
    return _power_norm(R)


def _hermitian_root(D):
    """Hermite 正定块的主平方根"""
    root = np.asarray(sqrtm(D), dtype=complex)
    return 0.5 * (root + adjoint(root))


def _block_cholesky(S, eps, stop_at_failure):
    """
    左视块 Cholesky：逐列求 C，对角块取 Hermite 平方根
    返回 (C, 各对角块平方根, 首个失败块号或 None)
    """
    n, m2 = S.n, S.m2
    M = S.matrix
    C = np.zeros_like(M, dtype=complex)
    roots = []
    for k in range(n):
        ks, ke = k * m2, (k + 1) * m2
        row = C[ks:ke, :ks]
        D = M[ks:ke, ks:ke] - row @ adjoint(row)
        D = 0.5 * (D + adjoint(D))
        lam = np.linalg.eigvalsh(D)
        if lam[0] <= eps:
            if stop_at_failure:
                return C, roots, k
            raise NotPositiveDefiniteError(
                f"S 在第 {k} 块失去正定性（最小特征值 {lam[0]:.3e}）",
                block=k, xi=(k + 1) * S.h)
        root = _hermitian_root(D)
        roots.append(root)
        C[ks:ke, ks:ke] = root
        if ke < M.shape[0]:
            below = M[ke:, ks:ke] - C[ke:, :ks] @ adjoint(row)
            # below · root⁻¹
            C[ke:, ks:ke] = adjoint(solve(root, adjoint(below), assume_a="pos"))
    return C, roots, None


def first_nonpositive_block(S, eps=None):
    """Cholesky 首次失败的块号，全部通过返回 None"""
    eps = 1e-10 * S.m2 if eps is None else eps
    return _block_cholesky(S, eps, True)[2]


def _block_inverse(C, roots, m2):
    """
    E = C⁻¹：C = T·diag(R_k)，T 块单位下三角（逐元素单位下三角），
    T⁻¹ 用三角回代，E = diag(R_k⁻¹)·T⁻¹
    """
    size = C.shape[0]
    inv_roots = [solve(R, np.eye(m2), assume_a="pos") for R in roots]
    T = C @ block_diag(*inv_roots)
    for k in range(len(roots)):
        T[k * m2:(k + 1) * m2, k * m2:(k + 1) * m2] = np.eye(m2)
    T_inv = solve_triangular(T, np.eye(size), lower=True, unit_diagonal=True)
    return block_diag(*inv_roots) @ T_inv


def factorize(S, eps=None):
    """S⁻¹ = E*E，E = C⁻¹"""
    eps = 1e-10 * S.m2 if eps is None else eps
    C, roots, _ = _block_cholesky(S, eps, False)
    E = _block_inverse(C, roots, S.m2)
    return TriangularFactor(S.n, S.m2, S.h, C, E)


def factor_residual(factor, S):
    """‖E*E S − I‖ / ‖S‖"""
    R = adjoint(factor.E) @ factor.E @ S.matrix - np.eye(S.matrix.shape[0])
    return float(np.linalg.norm(R, 2) / np.linalg.norm(S.matrix, 2))


def _as_cells(factor, f):
    f = np.asarray(f.samples if isinstance(f, GridFunction) else f, dtype=complex)
    if f.shape[0] != factor.n or f.shape[1] != factor.m2:
        raise GridError(f"函数应有 {factor.n} 个单元、{factor.m2} 行，实际 {f.shape}")
    return f


def apply_E(factor, f):
    """g = E f（因果）"""
    f = _as_cells(factor, f)
    n, m2 = factor.n, factor.m2
    g = (factor.E @ f.reshape(n * m2, -1)).reshape(f.shape)
    return GridFunction(n * factor.h, n, g, MIDPOINT)


def apply_E_adjoint_tail(factor, f):
    """
    对每个前缀 p 求 S_p⁻¹ f：
        Y[p−1, t] = Σ_{t ≤ r < p} E_rt* g_r，g = E f
    f 形状 (n, m2, k)；返回普通数组，形状 (n, n, m2, k)
    第一维是前缀长度 p − 1，第二维是单元 t；S_p⁻¹ f 即 Y[p−1, :p]，t ≥ p 处为零
    """
    f = _as_cells(factor, f)
    n, m2 = factor.n, factor.m2
    g = apply_E(factor, f).samples
    Eb = factor.E.reshape(n, m2, n, m2).swapaxes(1, 2)
    contrib = np.einsum("rtba,rbc->rtac", np.conj(Eb), g)
    return np.cumsum(contrib, axis=0)
