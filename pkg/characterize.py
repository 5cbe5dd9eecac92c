# -*- coding: utf-8 -*-
"""
特征刻画：判断采样得到的 φ 是否满足 Weyl 函数的各项条件
条件顺序：压缩性 → 原点 → 平方可积 → 正定性；第一个不通过的条件即拒绝理由
全纯性无法从一条水平线上的采样判定，报告里只声明“假定全纯”
"""
import json
from dataclasses import dataclass, field

import numpy as np

from errors import AliasingError, GridError
from structured import (AccelerantKernel, assemble_S, cells_on_grid, first_nonpositive_block,
                        min_eigenvalue_sweep)
from transform import origin_tolerance, origin_value, truncation_study, weyl_transform

CLAUSES = ("contractivity", "origin", "square_integrability", "positivity")
HOLOMORPHY_BANNER = "holomorphy assumed: samples on one horizontal line cannot certify it"


@dataclass(eq=False)
class CharacterizationReport:
    contractivity: dict
    origin: dict
    square_integrability: dict
    positivity: dict
    banner: str = HOLOMORPHY_BANNER
    extra: dict = field(default_factory=dict)

    @property
    def failing_clause(self):
        for name in CLAUSES:
            if not getattr(self, name)["pass"]:
                return name
        return None

    @property
    def accepted(self):
        return self.failing_clause is None

    @property
    def verdict(self):
        return "accept" if self.accepted else "reject"

    def to_dict(self):
        data = {name: getattr(self, name) for name in CLAUSES}
        data["verdict"] = self.verdict
        data["failing_clause"] = self.failing_clause
        data["banner"] = self.banner
        data.update(self.extra)
        return data

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)


def default_xi_grid(L, n, count=16):
    """[0, L] 上 count 个等距前缀，吸附到网格"""
    h = L / n
    cells = np.unique(np.clip(np.round(np.linspace(L / count, L, count) / h).astype(int), 1, n))
    return cells * h


def positivity_sweep(phi, xi_grid, eps_pos=None):
    """
    每个 ξ 的 S_ξ 最小特征值（同一个最大 S 的嵌套前导块）
    另用块 Cholesky 定出首个失去正定性的 ξ（精确到一个单元）
    """
    kernel = AccelerantKernel.from_profile(phi)
    xi_grid = np.asarray(xi_grid, dtype=float)
    counts = [cells_on_grid(xi, kernel.h, kernel.n) for xi in xi_grid]
    S = assemble_S(kernel, max(counts) * kernel.h)
    min_eigs = min_eigenvalue_sweep(S, counts)
    eps = 1e-10 * S.n * S.m2 if eps_pos is None else eps_pos
    block = first_nonpositive_block(S)
    critical = None if block is None else (block + 1) * kernel.h
    failing = [float(xi) for xi, lam in zip(xi_grid, min_eigs) if lam <= eps]
    monotone = bool(np.all(np.diff(min_eigs) <= 1e-12))
    return {
        "xi": xi_grid.tolist(),
        "min_eig": [float(x) for x in min_eigs],
        "smallest_failing_xi": failing[0] if failing else None,
        "critical_xi": critical,
        "monotone": monotone,
        "pass": not failing and critical is None,
    }


def _transform_failed(contractivity, error):
    """变换阶段出错：其余条件记为不通过并附上原因"""
    reason = f"{type(error).__name__}: {error}"
    origin = {"value": None, "tolerance": None, "error": reason, "pass": False}
    square = {"prefix_l2": [], "finite": False, "error": reason, "pass": False}
    positivity = {"xi": [], "min_eig": [], "smallest_failing_xi": None, "critical_xi": None,
                  "monotone": False, "error": reason, "pass": False}
    return CharacterizationReport(contractivity, origin, square, positivity,
                                  extra={"transform": {"error": reason}})


def check(w, L, n, xi_sweep=None, config=None):
    """采样 φ → CharacterizationReport（不抛异常，失败写进报告）"""
    from config import RunConfig

    config = config or RunConfig(L=L, n=n)
    sigma = w.sigma_max()
    contractivity = {
        "max_sigma": float(np.max(sigma)),
        "tolerance": config.tol_contr,
        "pass": bool(np.max(sigma) <= 1 + config.tol_contr),
    }

    try:
        origin, square, positivity, diagnostics = _transform_clauses(w, L, n, xi_sweep, config)
    except (AliasingError, GridError) as e:
        return _transform_failed(contractivity, e)
    return CharacterizationReport(contractivity, origin, square, positivity,
                                  extra={"transform": diagnostics})


def _transform_clauses(w, L, n, xi_sweep, config):
    """原点、平方可积、正定性三项都依赖变换结果"""
    phi = weyl_transform(w, L, n, config.taper, config.tail_correction)
    value = origin_value(phi, w.a)
    tol = origin_tolerance(phi, config.tol_origin_rel, config.tol_origin_abs)
    origin = {
        "value": float(np.max(np.abs(value))),
        "tolerance": tol,
        "pass": bool(np.max(np.abs(value)) <= tol),
    }

    kernel = AccelerantKernel.from_profile(phi)
    prefix = kernel.prefix_l2()
    study = truncation_study(w, L, n, taper=config.taper, tail_correction=config.tail_correction)
    finite = bool(np.all(np.isfinite(prefix)))
    square = {
        "prefix_l2": [float(x) for x in prefix[::max(1, n // 16)]],
        "finite": finite,
        "truncation": study,
        "pass": finite and study["convergent"],
    }

    xi_grid = default_xi_grid(L, n, config.xi_count) if xi_sweep is None else xi_sweep
    positivity = positivity_sweep(phi, xi_grid, config.eps_pos_scale * n * w.dims.m2)

    return origin, square, positivity, phi.diagnostics
