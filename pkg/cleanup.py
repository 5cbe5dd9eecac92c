# -*- coding: utf-8 -*-
"""
临时文件清理工具
原子写入失败留下的 *.tmp，以及 outputs/ 目录
"""
import glob
import os
import shutil


def cleanup_tmp_file(tmp_path):
    """删除单个临时文件"""
    if tmp_path and os.path.exists(tmp_path):
        try:
            os.remove(tmp_path)
            return True
        except OSError as e:
            print(f"⚠️  清理失败: {e}")
            return False
    return False


def cleanup_tmp_files(folder="."):
    """递归删除 folder 下所有 *.tmp"""
    removed = []
    for path in glob.glob(os.path.join(folder, "**", "*.tmp"), recursive=True):
        if cleanup_tmp_file(path):
            removed.append(path)
    if removed:
        print(f"🗑️  已清理 {len(removed)} 个临时文件")
    return removed


def cleanup_outputs(output_dir="outputs"):
    """删除整个输出目录"""
    if os.path.exists(output_dir):
        try:
            shutil.rmtree(output_dir)
            print(f"🗑️  已清理目录: {output_dir}")
            return True
        except OSError as e:
            print(f"⚠️  清理目录失败: {e}")
            return False
    return False


def cleanup_all(output_dir="outputs", folder="."):
    """清理临时文件和输出目录"""
    removed = cleanup_tmp_files(folder)
    cleaned = cleanup_outputs(output_dir)
    return bool(removed) or cleaned


def get_output_size(output_dir="outputs"):
    """输出目录总大小（字节）"""
    total = 0
    if os.path.exists(output_dir):
        for root, dirs, files in os.walk(output_dir):
            for f in files:
                total += os.path.getsize(os.path.join(root, f))
    return total
