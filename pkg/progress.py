# -*- coding: utf-8 -*-
"""
终端进度显示
采样：[=========>          ] 45% (1152/2048) 310 点/s 3.7s
"""
import sys
import time


class ProgressBar:
    """单行进度条，完成时换行"""

    def __init__(self, total, width=40, prefix="进度", unit="点", stream=None):
        self.total = max(int(total), 0)
        self.width = width
        self.prefix = prefix
        self.unit = unit
        self.current = 0
        self.start_time = time.time()
        self.stream = stream or sys.stdout

    def render(self, current):
        fraction = min(current / self.total, 1.0) if self.total else 1.0
        filled = int(self.width * fraction)
        if filled < self.width:
            bar = "=" * filled + ">" + " " * (self.width - filled - 1)
        else:
            bar = "=" * self.width
        elapsed = time.time() - self.start_time
        rate = current / elapsed if elapsed > 0 else 0.0
        return (f"\r{self.prefix}: [{bar}] {fraction * 100:.0f}% ({current}/{self.total}) "
                f"{rate:.0f} {self.unit}/s {format_seconds(elapsed)}")

    def update(self, current):
        self.current = current
        self.stream.write(self.render(current))
        self.stream.flush()
        if current >= self.total:
            self.stream.write("\n")


class SweepProgress:
    """
    库函数进度回调：hook(done, total)
    weyl_line 按块回调，反演按阶段回调
    """

    def __init__(self, prefix="采样中", quiet=False, stream=None):
        self.prefix = prefix
        self.quiet = quiet
        self.stream = stream
        self.bar = None
        self.calls = 0

    def hook(self, done, total):
        self.calls += 1
        if self.quiet:
            return
        if self.bar is None or self.bar.total != total:
            self.bar = ProgressBar(total, prefix=self.prefix, stream=self.stream)
        self.bar.update(done)


def format_seconds(seconds):
    """格式化耗时"""
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, rest = divmod(int(seconds), 60)
    return f"{minutes}m{rest:02d}s"
