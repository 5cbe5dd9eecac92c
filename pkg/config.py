# -*- coding: utf-8 -*-
"""
运行配置

配置方式：
1. 数值参数：RunConfig 默认值 < --config 指定的 JSON < 命令行参数
2. 线程数：复制 .env.example 为 .env，填写 WEYL_THREADS
"""
import json
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional, Tuple

from dotenv import load_dotenv

from errors import ConfigError

# 加载环境变量
load_dotenv()

PROCEDURES = ("A", "B", "C", "all")
EXTEND_MODES = ("zero", "hold")


def get_thread_count():
    """weyl_line 的工作线程数（.env 中的 WEYL_THREADS，默认 1）"""
    raw = os.getenv("WEYL_THREADS", "1").strip() or "1"
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"WEYL_THREADS 不是整数: {raw!r}")
    if threads < 1:
        raise ConfigError(f"WEYL_THREADS 必须 ≥ 1: {threads}")
    return threads


@dataclass(frozen=True)
class RunConfig:
    # 网格
    L: float = 2.0
    n: int = 512
    # 谱参数
    eta: float = 1.0
    a: float = 200.0
    nz: int = 2048
    b_schedule: Optional[Tuple[float, ...]] = None
    # 变换
    taper: bool = False
    tail_correction: bool = True
    # 反问题
    procedure: str = "all"
    force: bool = False
    # 延拓长度（正问题在窗口外延拓，b 可以超过 L）
    extend_to: Optional[float] = None
    # zero 补零，hold 延用最后一个单元的值
    extend_mode: str = "zero"
    # 容差
    tol_weyl: float = 1e-6
    tol_contr: float = 1e-8
    tol_origin_rel: float = 1e-2
    tol_origin_abs: float = 2.5e-2
    eps_pos_scale: float = 1e-10
    singular_guard: float = 1e-8
    # Gram 溢出控制
    gram_rescale: bool = True
    eta_b_cap: float = 300.0
    # 特征刻画
    xi_count: int = 16
    # 路径
    potential_path: Optional[str] = None
    samples_path: Optional[str] = None
    out_path: Optional[str] = None
    diagnostics_path: Optional[str] = None
    report_path: Optional[str] = None
    sweep_csv: Optional[str] = None
    outputs_dir: str = "outputs"

    def __post_init__(self):
        if self.b_schedule is not None and not isinstance(self.b_schedule, tuple):
            object.__setattr__(self, "b_schedule", tuple(float(b) for b in self.b_schedule))
        self.validate()

    @property
    def h(self):
        return self.L / self.n

    @property
    def eps_pos(self):
        """正定性阈值，随矩阵阶数放大（m2 由调用方乘上）"""
        return self.eps_pos_scale * self.n

    def validate(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ConfigError(f"n 必须是 ≥ 2 的 2 的幂: {self.n}")
        for name in ("L", "eta", "a", "eta_b_cap"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} 必须为正: {getattr(self, name)}")
        if self.nz < 2:
            raise ConfigError(f"nz 必须 ≥ 2: {self.nz}")
        for name in ("tol_weyl", "tol_contr", "tol_origin_rel", "tol_origin_abs",
                     "eps_pos_scale", "singular_guard"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"容差 {name} 必须为正: {getattr(self, name)}")
        if self.procedure not in PROCEDURES:
            raise ConfigError(f"procedure 只能是 {'/'.join(PROCEDURES)}: {self.procedure}")
        if self.xi_count < 1:
            raise ConfigError(f"xi_count 必须 ≥ 1: {self.xi_count}")
        if self.b_schedule is not None:
            bs = self.b_schedule
            if len(bs) < 2 or any(b <= 0 for b in bs) or any(b1 >= b2 for b1, b2 in zip(bs, bs[1:])):
                raise ConfigError(f"b_schedule 必须是至少两项的递增正数列: {bs}")
        if self.extend_mode not in EXTEND_MODES:
            raise ConfigError(f"extend_mode 只能是 {'/'.join(EXTEND_MODES)}: {self.extend_mode}")
        if self.extend_to is not None and not self.extend_to > 0:
            raise ConfigError(f"extend_to 必须为正: {self.extend_to}")

    def to_dict(self):
        data = asdict(self)
        if data["b_schedule"] is not None:
            data["b_schedule"] = list(data["b_schedule"])
        return data

    def to_json(self):
        """规范化 JSON（键排序，元组写成列表）"""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"未知配置项: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"配置项类型错误: {e}")

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"配置 JSON 解析失败: {e}")
        if not isinstance(data, dict):
            raise ConfigError("配置 JSON 顶层必须是对象")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        if not os.path.exists(path):
            raise FileNotFoundError(f"配置文件不存在: {path}")
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_json(f.read())

    def override(self, **changes):
        """用非 None 的值覆盖（命令行参数）"""
        changes = {k: v for k, v in changes.items() if v is not None}
        try:
            return replace(self, **changes)
        except TypeError as e:
            raise ConfigError(f"配置项错误: {e}")


def roundtrip_preset(base=None):
    """往返实验预设：开启余弦窗，延拓到 12/η 并在延拓区上取 b"""
    base = base or RunConfig()
    extend_to = base.extend_to or max(base.L, 12.0 / base.eta)
    b_schedule = base.b_schedule or (extend_to - 2.0 / base.eta,
                                     extend_to - 1.0 / base.eta,
                                     extend_to)
    return replace(base, taper=True, extend_to=extend_to, b_schedule=b_schedule)


def level_preset(base, n):
    """往返实验中网格 n 的配置：a、nz 与 n 同比例缩放，a·h 与 δζ 不变"""
    ratio = n / base.n
    return replace(base, n=n, a=base.a * ratio, nz=max(2, int(round(base.nz * ratio))))
