# -*- coding: utf-8 -*-
"""
异常类型
每个异常都带上阶段名 / 节点号，命令行据此给出退出码和提示
"""


class WeylError(RuntimeError):
    """所有数值阶段错误的基类"""

    def __init__(self, message, stage=None, node=None):
        self.stage = stage
        self.node = node
        parts = [message]
        if stage:
            parts.append(f"阶段={stage}")
        if node is not None:
            parts.append(f"节点={node}")
        super().__init__(" | ".join(parts))


class GridError(ValueError):
    """网格不一致、形状不匹配、ξ 不在网格上"""


class ConfigError(ValueError):
    """配置非法"""


class FileFormatError(ValueError):
    """输入文件格式错误"""

    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{path}: {message}")


class IntegrationError(WeylError):
    """传播过程中出现 NaN / Inf"""


class GramOverflowError(WeylError):
    """η·b 超过上限，且未开启重标定"""


class WeylConvergenceError(WeylError):
    """b 序列走完仍未收敛"""

    def __init__(self, message, history, z=None):
        self.history = list(history)
        self.z = z
        super().__init__(message, stage="weyl_point")


class AliasingError(WeylError):
    """ζ 步长太粗，无法覆盖 [0, L]"""

    def __init__(self, message, required_step):
        self.required_step = required_step
        super().__init__(message, stage="transform")


class NotPositiveDefiniteError(WeylError):
    """S_ξ 的 Cholesky 分解失败"""

    def __init__(self, message, block, xi=None):
        self.block = block
        self.xi = xi
        super().__init__(message, stage="factorize", node=block)


class SingularityError(WeylError):
    """恢复过程中矩阵接近奇异（I-ψψ*、γ₂、β₁ 等）"""


class StageError(WeylError):
    """反问题某一阶段失败，包装原始异常"""

    def __init__(self, stage, cause):
        self.cause = cause
        node = getattr(cause, "node", None)
        super().__init__(str(cause), stage=stage, node=node)


class CharacterizationRejected(WeylError):
    """特征刻画不通过（未加 --force）"""

    def __init__(self, report):
        self.report = report
        super().__init__(f"特征刻画拒绝: {report.failing_clause}", stage="characterization")
