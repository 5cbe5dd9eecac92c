# -*- coding: utf-8 -*-
"""
文件读写工具
位势 / Weyl 采样 / Φ₁ 用 CSV（首行 # 键=值 头），诊断与报告用 JSON
所有输出先写临时文件再 os.replace，保证原子性
"""
import csv
import json
import os

import numpy as np

from core_types import MIDPOINT, NODE, BlockDims, GridFunction, PotentialProfile
from errors import FileFormatError

INT_KEYS = ("m1", "m2", "n", "nz")


def ensure_folders_exist(output_dir):
    if output_dir and not os.path.exists(output_dir):
        os.makedirs(output_dir, exist_ok=True)


def atomic_write(path, writer, mode="w"):
    """writer(f) 写入临时文件，成功后替换目标文件"""
    from cleanup import cleanup_tmp_file

    ensure_folders_exist(os.path.dirname(os.path.abspath(path)))
    tmp = f"{path}.tmp"
    try:
        with open(tmp, mode, encoding="utf-8", newline="") as f:
            writer(f)
        os.replace(tmp, path)
    except BaseException:
        cleanup_tmp_file(tmp)
        raise
    return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"无法序列化: {type(obj).__name__}")


def write_json(path, data):
    text = json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, default=_json_default)
    return atomic_write(path, lambda f: f.write(text + "\n"))


def _format_header(meta):
    parts = []
    for key, value in meta.items():
        if isinstance(value, float):
            value = repr(value)
        parts.append(f"{key}={value}")
    return ",".join(parts)


def read_header(path):
    """解析首行 # 键=值,键=值"""
    if not os.path.exists(path):
        raise FileNotFoundError(f"文件不存在: {path}")
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().strip()
    if not first.startswith("#"):
        raise FileFormatError(path, "缺少 # 头行")
    meta = {}
    for item in first.lstrip("#").split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise FileFormatError(path, f"头字段缺少 '=': {item}")
        key, value = (s.strip() for s in item.split("=", 1))
        try:
            meta[key] = int(value) if key in INT_KEYS else (
                float(value) if key not in ("layout",) else value)
        except ValueError:
            raise FileFormatError(path, f"头字段 {key} 的值无法解析: {value}")
    return meta


def _require(meta, path, *keys):
    missing = [k for k in keys if k not in meta]
    if missing:
        raise FileFormatError(path, f"头缺少字段: {', '.join(missing)}")


def _load_rows(path, columns):
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError as e:
        raise FileFormatError(path, f"数据行解析失败: {e}")
    if data.shape[1] != columns:
        raise FileFormatError(path, f"每行应有 {columns} 列，实际 {data.shape[1]}")
    return data


def _pack(matrices):
    """(k, r, c) 复矩阵 → (k, 2rc) 列：Re, Im 交替，按行优先"""
    flat = matrices.reshape(matrices.shape[0], -1)
    out = np.empty((flat.shape[0], 2 * flat.shape[1]))
    out[:, 0::2] = flat.real
    out[:, 1::2] = flat.imag
    return out


def _unpack(columns, shape):
    return (columns[:, 0::2] + 1j * columns[:, 1::2]).reshape((columns.shape[0],) + shape)


def _savetxt(path, header, table):
    return atomic_write(path, lambda f: np.savetxt(f, table, delimiter=",", fmt="%.17g",
                                                   header=header, comments="# "))


def write_potential(path, profile):
    dims = profile.dims
    header = _format_header({"m1": dims.m1, "m2": dims.m2, "L": float(profile.L),
                             "n": profile.n, "layout": MIDPOINT})
    table = np.column_stack([profile.v.x, _pack(profile.v.samples)])
    return _savetxt(path, header, table)


def read_potential(path):
    meta = read_header(path)
    _require(meta, path, "m1", "m2", "L", "n")
    if meta.get("layout", MIDPOINT) != MIDPOINT:
        raise FileFormatError(path, f"只支持 layout={MIDPOINT}")
    dims = BlockDims(meta["m1"], meta["m2"])
    data = _load_rows(path, 1 + 2 * dims.m1 * dims.m2)
    if data.shape[0] != meta["n"]:
        raise FileFormatError(path, f"头中 n={meta['n']}，实际 {data.shape[0]} 行")
    samples = _unpack(data[:, 1:], (dims.m1, dims.m2))
    return PotentialProfile(dims, GridFunction(meta["L"], meta["n"], samples, MIDPOINT))


def write_weyl_samples(path, w):
    dims = w.dims
    header = _format_header({"m1": dims.m1, "m2": dims.m2, "eta": float(w.eta), "a": w.a,
                             "nz": int(w.zeta.size), "dzeta": w.dzeta})
    table = np.column_stack([w.zeta, _pack(w.values), w.converged.astype(float)])
    return _savetxt(path, header, table)


def read_weyl_samples(path):
    from direct import WeylSamples

    meta = read_header(path)
    _require(meta, path, "m1", "m2", "eta", "nz")
    dims = BlockDims(meta["m1"], meta["m2"])
    entries = 2 * dims.m1 * dims.m2
    data = _load_rows(path, 2 + entries)
    if data.shape[0] != meta["nz"]:
        raise FileFormatError(path, f"头中 nz={meta['nz']}，实际 {data.shape[0]} 行")
    values = _unpack(data[:, 1:1 + entries], (dims.m2, dims.m1))
    return WeylSamples(dims, meta["eta"], data[:, 0], values, data[:, -1] > 0.5)


def write_phi1(path, profile):
    """节点行（layout 列 0）存 Φ₁，中点行（layout 列 1）存 Φ₁′"""
    dims = profile.dims
    header = _format_header({"m1": dims.m1, "m2": dims.m2, "L": float(profile.L),
                             "n": profile.n, "layout": "node+midpoint"})
    nodes = np.column_stack([profile.phi1.x, np.zeros(profile.n + 1),
                             _pack(profile.phi1.samples)])
    mids = np.column_stack([profile.phi1_prime.x, np.ones(profile.n),
                            _pack(profile.phi1_prime.samples)])
    return _savetxt(path, header, np.vstack([nodes, mids]))


def read_phi1(path):
    from transform import FROM_WEYL, Phi1Profile

    meta = read_header(path)
    _require(meta, path, "m1", "m2", "L", "n")
    dims = BlockDims(meta["m1"], meta["m2"])
    data = _load_rows(path, 2 + 2 * dims.m1 * dims.m2)
    node_rows = data[data[:, 1] < 0.5]
    mid_rows = data[data[:, 1] >= 0.5]
    shape = (dims.m2, dims.m1)
    n, L = meta["n"], meta["L"]
    if node_rows.shape[0] != n + 1 or mid_rows.shape[0] != n:
        raise FileFormatError(path, "节点行或中点行数量与 n 不符")
    return Phi1Profile(dims,
                       GridFunction(L, n, _unpack(node_rows[:, 2:], shape), NODE),
                       GridFunction(L, n, _unpack(mid_rows[:, 2:], shape), MIDPOINT),
                       FROM_WEYL)


def write_table(path, rows):
    """误差表：首行列名"""
    columns = list(rows[0].keys()) if rows else []

    def writer(f):
        out = csv.DictWriter(f, fieldnames=columns)
        out.writeheader()
        for row in rows:
            out.writerow({k: (f"{v:.6e}" if isinstance(v, float) else v) for k, v in row.items()})

    return atomic_write(path, writer)


def write_sweep_csv(path, xi, min_eig):
    table = np.column_stack([np.asarray(xi, dtype=float), np.asarray(min_eig, dtype=float)])
    return atomic_write(path, lambda f: np.savetxt(f, table, delimiter=",", fmt="%.17g",
                                                   header="xi,min_eig", comments=""))
