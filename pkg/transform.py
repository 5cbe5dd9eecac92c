# -*- coding: utf-8 -*-
"""
Weyl 变换：φ(ζ+iη) 采样 → Φ₁（节点）与 Φ₁′（中点）

矩阵傅里叶变换：核矩阵 (节点 × ζ) 乘以采样矩阵，一次算出所有 x
在节点 t 上取 x = 2t：
    Φ₁(t)  =  (1/π) e^{2tη} Σ w_k e^{−2itζ_k} φ_k / (2i(ζ_k + iη))
    Φ₁′(t) = −(1/π) e^{2tη} Σ w_k e^{−2itζ_k} φ_k
"""
from dataclasses import dataclass, field

import numpy as np

from core_types import MIDPOINT, NODE, GridFunction
from direct import WeylSamples
from errors import AliasingError, GridError

SYNTHETIC = "synthetic"
FROM_WEYL = "from_weyl"

# 外侧 10% 的 ζ 区间：余弦窗、尾部估计、1/z 系数估计共用
TAIL_FRACTION = 0.1


@dataclass(frozen=True, eq=False)
class Phi1Profile:
    dims: object
    phi1: GridFunction = None
    phi1_prime: GridFunction = None
    provenance: str = FROM_WEYL
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.dims.m2, self.dims.m1)
        if self.phi1 is not None:
            if self.phi1.layout != NODE or self.phi1.shape != shape:
                raise GridError(f"Φ₁ 需要节点采样、形状 {shape}")
        if self.phi1_prime is not None:
            if self.phi1_prime.layout != MIDPOINT or self.phi1_prime.shape != shape:
                raise GridError(f"Φ₁′ 需要中点采样、形状 {shape}")
        if self.phi1 is not None and self.phi1_prime is not None:
            if not self.phi1.same_grid(self.phi1_prime):
                raise GridError("Φ₁ 与 Φ₁′ 网格不一致")

    @property
    def grid(self):
        return self.phi1 if self.phi1 is not None else self.phi1_prime

    @property
    def L(self):
        return self.grid.L

    @property
    def n(self):
        return self.grid.n

    @property
    def h(self):
        return self.grid.h

    def prefix(self, k):
        return Phi1Profile(self.dims,
                           self.phi1.prefix(k) if self.phi1 is not None else None,
                           self.phi1_prime.prefix(k) if self.phi1_prime is not None else None,
                           self.provenance, dict(self.diagnostics))


def synthetic_phi1(dims, phi1, phi1_prime, L, n):
    """由解析函数构造 Φ₁（节点）与 Φ₁′（中点）"""
    h = L / n
    shape = (dims.m2, dims.m1)
    x_nodes = np.arange(n + 1) * h
    x_mid = (np.arange(n) + 0.5) * h
    nodes = np.array([np.broadcast_to(np.asarray(phi1(x), dtype=complex), shape) for x in x_nodes])
    mids = np.array([np.broadcast_to(np.asarray(phi1_prime(x), dtype=complex), shape) for x in x_mid])
    return Phi1Profile(dims, GridFunction(L, n, nodes, NODE), GridFunction(L, n, mids, MIDPOINT),
                       SYNTHETIC)


def zero_phi1(dims, L, n):
    zero = np.zeros((dims.m2, dims.m1))
    return synthetic_phi1(dims, lambda x: zero, lambda x: zero, L, n)


def _check_grid(w, L):
    if not w.is_symmetric():
        raise GridError("ζ 网格必须是对称等距的 [−a, a]")
    required = np.pi / (2 * L)
    if w.dzeta > required * (1 + 1e-12):
        raise AliasingError(
            f"ζ 步长 {w.dzeta:.4g} 过粗，[0, {L}] 需要 δζ ≤ {required:.4g}", required)


def quadrature_weights(w, taper=False):
    """梯形权重；taper 时在外侧 10% 乘升余弦窗"""
    weights = np.full(w.zeta.size, w.dzeta)
    weights[[0, -1]] *= 0.5
    if taper:
        a = w.a
        edge = (1 - TAIL_FRACTION) * a
        r = np.clip((np.abs(w.zeta) - edge) / (TAIL_FRACTION * a), 0.0, 1.0)
        weights *= 0.5 * (1 + np.cos(np.pi * r))
    return weights


def _tail_mask(w):
    return np.abs(w.zeta) > (1 - TAIL_FRACTION) * w.a


def tail_coefficient(w):
    """φ 的 1/z 系数 κ：外侧 10% 上 φ(ζ+iη)·(ζ + 2iη) 的平均"""
    mask = _tail_mask(w)
    return np.mean(w.values[mask] * (w.zeta[mask] + 2j * w.eta)[:, None, None], axis=0)


def _kernels(w, t, weights, derivative):
    """(len(t), nz) 核矩阵"""
    phase = np.exp(2 * w.eta * t)[:, None] * np.exp(-2j * np.outer(t, w.zeta))
    if derivative:
        return -phase * weights[None, :] / np.pi
    return phase * (weights / (2j * (w.zeta + 1j * w.eta)))[None, :] / np.pi


def _apply(kernel, values):
    nz = values.shape[0]
    out = kernel @ values.reshape(nz, -1)
    return out.reshape((kernel.shape[0],) + values.shape[1:])


def _prepared(w, tail_correction):
    """扣除 κ/(z + iη) 后的采样与 κ"""
    if not tail_correction:
        return w.values, np.zeros(w.values.shape[1:], dtype=complex)
    kappa = tail_coefficient(w)
    residual = w.values - kappa[None] / (w.zeta + 2j * w.eta)[:, None, None]
    return residual, kappa


def _phi1_tail_term(kappa, eta, t):
    return (1j / eta) * (1 - np.exp(-2 * eta * t))[:, None, None] * kappa[None]


def _phi1_prime_tail_term(kappa, eta, t):
    return 2j * np.exp(-2 * eta * t)[:, None, None] * kappa[None]


def complex_to_json(a):
    """复数组 → {"re": ..., "im": ...}"""
    a = np.asarray(a)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def l2_norm(samples, h, layout=MIDPOINT):
    """网格函数的 L² 范数（Frobenius 逐点；节点用梯形，中点用中点公式）"""
    sq = np.sum(np.abs(np.asarray(samples)) ** 2, axis=(-2, -1))
    if layout == NODE:
        return float(np.sqrt(h * (np.sum(sq) - 0.5 * (sq[0] + sq[-1]))))
    return float(np.sqrt(h * np.sum(sq)))


def phi1_from_weyl(w, L, n, taper=False, tail_correction=True):
    """Φ₁ 节点采样，附尾部估计"""
    _check_grid(w, L)
    t = np.arange(n + 1) * (L / n)
    weights = quadrature_weights(w, taper)
    values, kappa = _prepared(w, tail_correction)
    phi1 = _apply(_kernels(w, t, weights, False), values) + _phi1_tail_term(kappa, w.eta, t)

    tail_weights = np.where(_tail_mask(w), weights, 0.0)
    tail = _apply(_kernels(w, t, tail_weights, False), values)
    diagnostics = {
        "kappa": complex_to_json(kappa),
        "phi1_tail_l2": l2_norm(tail, L / n, NODE),
        "phi1_at_zero": float(np.max(np.abs(phi1[0]))),
        "taper": bool(taper),
        "tail_correction": bool(tail_correction),
    }
    return Phi1Profile(w.dims, phi1=GridFunction(L, n, phi1, NODE), diagnostics=diagnostics)


def phi1_prime_from_weyl(w, L, n, taper=False, tail_correction=True):
    """Φ₁′ 中点采样，附尾部估计"""
    _check_grid(w, L)
    t = (np.arange(n) + 0.5) * (L / n)
    weights = quadrature_weights(w, taper)
    values, kappa = _prepared(w, tail_correction)
    prime = _apply(_kernels(w, t, weights, True), values) + _phi1_prime_tail_term(kappa, w.eta, t)

    tail_weights = np.where(_tail_mask(w), weights, 0.0)
    tail = _apply(_kernels(w, t, tail_weights, True), values)
    diagnostics = {
        "kappa": complex_to_json(kappa),
        "phi1_prime_tail_l2": l2_norm(tail, L / n),
    }
    return Phi1Profile(w.dims, phi1_prime=GridFunction(L, n, prime, MIDPOINT),
                       diagnostics=diagnostics)


def weyl_transform(w, L, n, taper=False, tail_correction=True):
    """Φ₁ 与 Φ₁′ 一起算，附差分一致性与原点估计"""
    p1 = phi1_from_weyl(w, L, n, taper, tail_correction)
    p2 = phi1_prime_from_weyl(w, L, n, taper, tail_correction)
    diagnostics = dict(p1.diagnostics)
    diagnostics.update(p2.diagnostics)
    diagnostics["eta"] = w.eta
    diagnostics["a"] = w.a
    profile = Phi1Profile(w.dims, p1.phi1, p2.phi1_prime, FROM_WEYL, diagnostics)
    diagnostics["derivative_consistency_l2"] = derivative_consistency(profile)
    diagnostics["origin_value"] = float(np.max(np.abs(origin_value(profile, w.a))))
    return profile


def derivative_consistency(profile):
    """‖Φ₁′ − D_h Φ₁‖_{L²}，D_h 为中点差商"""
    phi1 = profile.phi1.samples
    fd = (phi1[1:] - phi1[:-1]) / profile.h
    return l2_norm(profile.phi1_prime.samples - fd, profile.h)


def origin_value(profile, a):
    """
    Φ₁(0+)：从截断分辨率 π/(2a) 之外的两个节点线性外推
    """
    h = profile.h
    k0 = max(2, int(np.ceil(4 * (np.pi / (2 * a)) / h)))
    k0 = min(k0, profile.n // 2)
    phi1 = profile.phi1.samples
    return 2 * phi1[k0] - phi1[2 * k0]


def origin_tolerance(profile, rel=1e-2, abs_tol=2.5e-2):
    sup = float(np.max(np.abs(profile.phi1.samples)))
    return max(rel * sup, abs_tol)


def restrict(w, a_new):
    """只保留 |ζ| ≤ a_new 的采样"""
    keep = np.abs(w.zeta) <= a_new * (1 + 1e-12)
    return WeylSamples(w.dims, w.eta, w.zeta[keep], w.values[keep],
                       w.converged[keep], w.increments[keep])


def truncation_study(w, L, n, fractions=(0.25, 0.5, 1.0), taper=False, tail_correction=True):
    """
    嵌套截断 a·f 下的 Φ₁′，相邻 L² 变化不增即判为收敛
    """
    primes = []
    for f in fractions:
        sub = restrict(w, f * w.a)
        primes.append(phi1_prime_from_weyl(sub, L, n, taper, tail_correction).phi1_prime.samples)
    changes = [l2_norm(b - a_, L / n) for a_, b in zip(primes, primes[1:])]
    convergent = all(c2 <= c1 * (1 + 1e-9) + 1e-14 for c1, c2 in zip(changes, changes[1:]))
    return {
        "a_values": [float(f * w.a) for f in fractions],
        "changes": changes,
        "prime_l2": [l2_norm(p, L / n) for p in primes],
        "convergent": bool(convergent),
    }


def eta_independence_check(w1, w2, L, n, taper=False, tail_correction=True):
    """两个高度上算出的 Φ₁ 的 L²(0, L) 差"""
    if w1.dims != w2.dims:
        raise GridError("两组采样维数不同")
    p1 = phi1_from_weyl(w1, L, n, taper, tail_correction).phi1.samples
    p2 = phi1_from_weyl(w2, L, n, taper, tail_correction).phi1.samples
    return l2_norm(p1 - p2, L / n, NODE)
