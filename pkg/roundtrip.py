# -*- coding: utf-8 -*-
"""
往返实验：v → φ（正问题）→ v̂（反问题，过程 A/B/C），按 n、2n 两级网格出误差表
"""
import numpy as np

from config import level_preset, roundtrip_preset
from core_types import resample_midpoint, spectral_norms
from direct import extend_potential, weyl_point, weyl_line, zeta_grid
from inverse import TRIM, invert_phi1, trimmed_count
from transform import weyl_transform

# 跳变附近不计误差的单元数
JUMP_CELLS = 3


def sample_weyl(profile, config, threads=1, progress=None):
    """在窗口外延拓后，沿 ζ + iη 采样 Weyl 函数"""
    extended = extend_potential(profile, config.extend_to or profile.L, config.extend_mode)
    return weyl_line(extended, config.eta, zeta_grid(config.a, config.nz),
                     b_schedule=config.b_schedule, tol_weyl=config.tol_weyl,
                     rescale=config.gram_rescale, eta_b_cap=config.eta_b_cap,
                     threads=threads, progress=progress)


def jump_mask(profile, cells=JUMP_CELLS):
    """真实位势跳变点（含 x = 0）附近 ±cells 个单元为 True"""
    v = profile.v.samples
    jumps = np.flatnonzero(np.max(np.abs(np.diff(v, axis=0)), axis=(1, 2)) > 1e-12) + 1
    mask = np.zeros(profile.n, dtype=bool)
    for k in np.r_[0, jumps]:
        mask[max(0, k - cells):min(profile.n, k + cells)] = True
    return mask


def recovery_errors(v_hat, v_true):
    """[0, 0.9L] 上的最大误差、L² 误差，以及去掉跳变邻域后的最大误差"""
    n = v_hat.n
    count = trimmed_count(n, n)
    err = spectral_norms(v_hat.v.samples - v_true.v.samples)[:count]
    away = ~jump_mask(v_true)[:count]
    return {
        "max_err": float(np.max(err)),
        "l2_err": float(np.sqrt(v_hat.h * np.sum(err ** 2))),
        "max_err_away_from_jumps": float(np.max(err[away])) if np.any(away) else 0.0,
    }


def forward_consistency(v_hat, w, config, points=9):
    """对 v̂ 重新求正问题，在若干 ζ 上比较 Weyl 函数"""
    extended = extend_potential(v_hat, config.extend_to or v_hat.L, config.extend_mode)
    idx = np.unique(np.linspace(0, w.zeta.size - 1, points).round().astype(int))
    worst = 0.0
    for k in idx:
        p = weyl_point(extended, w.zeta[k] + 1j * w.eta, config.b_schedule,
                       tol_weyl=config.tol_weyl, rescale=config.gram_rescale,
                       eta_b_cap=config.eta_b_cap, strict=False)
        worst = max(worst, float(np.linalg.norm(p.value - w.values[k], 2)))
    return {"zeta": w.zeta[idx].tolist(), "max_discrepancy": worst}


def run_roundtrip(profile, config, levels=None, threads=1, progress=None, consistency=True):
    """
    返回 (误差表行列表, 诊断)
    每行：n、过程、误差、残差上确界（[0, 0.9L] 内）
    每一级网格单独采样，a、nz 随 n 缩放（level_preset）
    """
    config = roundtrip_preset(config.override(L=profile.L))
    levels = levels or (config.n, 2 * config.n)
    rows = []
    weyl = {"converged": 0, "nz": 0, "failures": []}
    diagnostics = {"weyl": weyl, "levels": {}}
    for n in levels:
        level_config = level_preset(config, n)
        w = sample_weyl(profile, level_config, threads, progress)
        weyl["converged"] += int(np.sum(w.converged))
        weyl["nz"] += int(w.zeta.size)
        weyl["failures"].extend(w.failures)

        phi = weyl_transform(w, profile.L, n, level_config.taper, level_config.tail_correction)
        result = invert_phi1(phi, level_config.procedure, guard=level_config.singular_guard,
                             eps_pos=level_config.eps_pos_scale * n * profile.dims.m2)
        truth = resample_midpoint(profile, n)
        residual_max = {name: r["max_trimmed"] for name, r in result.diagnostics["residuals"].items()}
        for name, v_hat in sorted(result.potentials.items()):
            row = {"n": n, "procedure": name}
            row.update(recovery_errors(v_hat, truth))
            row["max_residual"] = max(residual_max.values()) if residual_max else 0.0
            rows.append(row)
        level = {"a": level_config.a, "nz": level_config.nz,
                 "deltas": result.diagnostics["deltas"], "residuals": residual_max,
                 "transform": phi.diagnostics}
        if consistency:
            level["forward"] = forward_consistency(result.potential, w, level_config)
        diagnostics["levels"][str(n)] = level
    diagnostics["window"] = [0.0, TRIM * profile.L]
    return rows, diagnostics