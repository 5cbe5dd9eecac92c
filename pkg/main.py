# -*- coding: utf-8 -*-
"""
Weyl2Dirac 终端入口
子命令：direct / transform / invert / check / roundtrip / clean
退出码：0 成功，1 输入或配置错误，2 正问题不收敛，3 特征刻画拒绝，4 反问题阶段失败
"""
import argparse
import os
import sys

EXIT_OK = 0
EXIT_IO = 1
EXIT_NOT_CONVERGED = 2
EXIT_REJECTED = 3
EXIT_STAGE = 4


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def _default_out(config, path, suffix):
    return os.path.join(config.outputs_dir, f"{_stem(path)}_{suffix}")


def build_config(args):
    """默认值 < --config JSON < 命令行"""
    from config import RunConfig

    base = RunConfig.load(args.config) if args.config else RunConfig()
    keys = ("L", "n", "eta", "a", "nz", "b_schedule", "taper", "tail_correction", "procedure",
            "force", "extend_to", "extend_mode", "tol_weyl", "xi_count", "potential_path", "samples_path",
            "out_path", "diagnostics_path", "report_path", "sweep_csv", "outputs_dir")
    changes = {k: getattr(args, k, None) for k in keys}
    if changes.get("b_schedule") is not None:
        changes["b_schedule"] = tuple(changes["b_schedule"])
    return base.override(**changes)


def _progress(args, prefix):
    from progress import SweepProgress
    return SweepProgress(prefix=prefix, quiet=args.quiet).hook


def cmd_direct(config, args):
    from config import get_thread_count
    from direct import extend_potential, weyl_line, zeta_grid
    from utils import read_potential, write_weyl_samples

    print(f"📥 读取位势: {config.potential_path}")
    profile = read_potential(config.potential_path)
    extended = extend_potential(profile, config.extend_to or profile.L, config.extend_mode)
    print(f"🔄 求解正问题: m1={profile.dims.m1}, m2={profile.dims.m2}, "
          f"η={config.eta}, a={config.a}, nz={config.nz}")
    w = weyl_line(extended, config.eta, zeta_grid(config.a, config.nz),
                  b_schedule=config.b_schedule, tol_weyl=config.tol_weyl,
                  rescale=config.gram_rescale, eta_b_cap=config.eta_b_cap,
                  threads=get_thread_count(), progress=_progress(args, "采样中"))
    out = config.out_path or _default_out(config, config.potential_path, "weyl.csv")
    write_weyl_samples(out, w)
    print(f"✅ Weyl 采样已保存: {out}")

    bad = int((~w.converged).sum())
    if w.failures:
        for f in w.failures:
            print(f"❌ ζ∈[{f['zeta_from']:.3g}, {f['zeta_to']:.3g}] 失败: {f['error']}")
    if bad:
        print(f"⚠️  {bad}/{w.zeta.size} 个谱点未收敛（最大增量 {w.increments.max():.3e}）")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_transform(config, args):
    from transform import weyl_transform
    from utils import read_weyl_samples, write_phi1

    print(f"📥 读取 Weyl 采样: {config.samples_path}")
    w = read_weyl_samples(config.samples_path)
    print(f"🔄 变换到 Φ₁: L={config.L}, n={config.n}")
    phi = weyl_transform(w, config.L, config.n, config.taper, config.tail_correction)
    out = config.out_path or _default_out(config, config.samples_path, "phi1.csv")
    write_phi1(out, phi)
    print(f"✅ Φ₁ 已保存: {out}（原点估计 {phi.diagnostics['origin_value']:.3e}）")
    return EXIT_OK


def cmd_invert(config, args):
    from errors import CharacterizationRejected
    from inverse import invert
    from utils import read_weyl_samples, write_json, write_potential

    print(f"📥 读取 Weyl 采样: {config.samples_path}")
    w = read_weyl_samples(config.samples_path)
    print(f"🔄 反演: 过程 {config.procedure}, L={config.L}, n={config.n}")
    try:
        result = invert(w, config.L, config.n, config.procedure, config,
                        progress=_progress(args, "反演中"))
    except CharacterizationRejected as e:
        report_path = config.report_path or _default_out(config, config.samples_path, "report.json")
        write_json(report_path, e.report.to_dict())
        print(f"❌ 特征刻画拒绝（{e.report.failing_clause}），报告: {report_path}")
        print("💡 确认数据无误时可加 --force 跳过")
        return EXIT_REJECTED

    out = config.out_path or _default_out(config, config.samples_path, "potential.csv")
    diag = config.diagnostics_path or _default_out(config, config.samples_path, "diagnostics.json")
    write_potential(out, result.potential)
    write_json(diag, result.diagnostics)
    for pair, delta in sorted(result.diagnostics["deltas"].items()):
        print(f"   过程差 {pair}: {delta:.3e}")
    print(f"✅ 位势已保存: {out}")
    print(f"✅ 诊断已保存: {diag}")
    return EXIT_OK


def cmd_check(config, args):
    from characterize import check
    from utils import read_weyl_samples, write_json, write_sweep_csv

    print(f"📥 读取 Weyl 采样: {config.samples_path}")
    w = read_weyl_samples(config.samples_path)
    print("🔄 检查特征刻画条件...")
    report = check(w, config.L, config.n, config=config)
    out = config.report_path or _default_out(config, config.samples_path, "report.json")
    write_json(out, report.to_dict())
    if config.sweep_csv:
        write_sweep_csv(config.sweep_csv, report.positivity["xi"], report.positivity["min_eig"])
    print(f"⚠️  {report.banner}")
    if report.accepted:
        print(f"✅ 通过，报告: {out}")
        return EXIT_OK
    print(f"❌ 拒绝（{report.failing_clause}），报告: {out}")
    return EXIT_REJECTED


def cmd_roundtrip(config, args):
    from config import get_thread_count
    from roundtrip import run_roundtrip
    from utils import read_potential, write_json, write_table

    print(f"📥 读取位势: {config.potential_path}")
    profile = read_potential(config.potential_path)
    print(f"🔄 往返实验: n={config.n}, {2 * config.n}")
    rows, diagnostics = run_roundtrip(profile, config, threads=get_thread_count(),
                                      progress=_progress(args, "采样中"),
                                      consistency=not args.no_consistency)
    out = config.out_path or _default_out(config, config.potential_path, "roundtrip.csv")
    diag = config.diagnostics_path or _default_out(config, config.potential_path,
                                                   "roundtrip.json")
    write_table(out, rows)
    write_json(diag, diagnostics)
    for row in rows:
        print(f"   n={row['n']:<5} 过程 {row['procedure']}: 最大误差 {row['max_err']:.3e}, "
              f"L² 误差 {row['l2_err']:.3e}")
    print(f"✅ 误差表已保存: {out}")
    return EXIT_OK


def cmd_clean(config, args):
    from cleanup import cleanup_all, get_output_size

    size = get_output_size(config.outputs_dir)
    if not cleanup_all(config.outputs_dir):
        print("✓ 没有需要清理的文件")
    elif size:
        print(f"✅ 已释放 {size / 1024:.1f} KB")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--config", help="JSON 配置文件")
    p.add_argument("--quiet", action="store_true", help="不显示进度条")
    p.add_argument("--outputs-dir", dest="outputs_dir")
    p.add_argument("--out", dest="out_path")


def _add_grid(p):
    p.add_argument("--L", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--taper", action="store_const", const=True)
    p.add_argument("--no-tail-correction", dest="tail_correction", action="store_const", const=False)


def _add_spectral(p):
    p.add_argument("--eta", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--nz", type=int)
    p.add_argument("--b-schedule", dest="b_schedule", type=float, nargs="+")
    p.add_argument("--tol-weyl", dest="tol_weyl", type=float)
    p.add_argument("--extend-to", dest="extend_to", type=float)
    p.add_argument("--extend-mode", dest="extend_mode", choices=("zero", "hold"),
                   help="窗口外补零（zero）或延用末单元的值（hold）")


def build_parser():
    parser = argparse.ArgumentParser(prog="weyl2dirac",
                                     description="Dirac 型系统 Weyl 函数的正问题与反问题")
    parser.add_argument("--no-banner", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("direct", help="位势 → Weyl 采样")
    _add_common(p)
    _add_spectral(p)
    p.add_argument("--potential", dest="potential_path", required=True)

    p = sub.add_parser("transform", help="Weyl 采样 → Φ₁")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--samples", dest="samples_path", required=True)

    p = sub.add_parser("invert", help="Weyl 采样 → 位势")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--samples", dest="samples_path", required=True)
    p.add_argument("--procedure", choices=("A", "B", "C", "all"))
    p.add_argument("--force", action="store_const", const=True)
    p.add_argument("--diagnostics", dest="diagnostics_path")
    p.add_argument("--report", dest="report_path")

    p = sub.add_parser("check", help="检查特征刻画条件")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--samples", dest="samples_path", required=True)
    p.add_argument("--xi-count", dest="xi_count", type=int)
    p.add_argument("--report", dest="report_path")
    p.add_argument("--sweep-csv", dest="sweep_csv")

    p = sub.add_parser("roundtrip", help="往返实验误差表")
    _add_common(p)
    _add_spectral(p)
    p.add_argument("--n", type=int)
    p.add_argument("--procedure", choices=("A", "B", "C", "all"))
    p.add_argument("--potential", dest="potential_path", required=True)
    p.add_argument("--diagnostics", dest="diagnostics_path")
    p.add_argument("--no-consistency", action="store_true")

    p = sub.add_parser("clean", help="清理临时文件和输出目录")
    _add_common(p)
    return parser


COMMANDS = {
    "direct": cmd_direct,
    "transform": cmd_transform,
    "invert": cmd_invert,
    "check": cmd_check,
    "roundtrip": cmd_roundtrip,
    "clean": cmd_clean,
}


def main(argv=None):
    from errors import (CharacterizationRejected, ConfigError, FileFormatError, GridError,
                        WeylConvergenceError, WeylError)

    args = build_parser().parse_args(argv)
    if not args.no_banner and not args.quiet:
        from banner import show_banner
        show_banner()

    try:
        config = build_config(args)
        return COMMANDS[args.command](config, args)
    except FileNotFoundError as e:
        print(f"❌ 文件不存在: {e.filename or e}")
        return EXIT_IO
    except (FileFormatError, ConfigError, GridError) as e:
        print(f"❌ {e}")
        return EXIT_IO
    except WeylConvergenceError as e:
        print(f"❌ {e}")
        return EXIT_NOT_CONVERGED
    except CharacterizationRejected as e:
        print(f"❌ {e}")
        return EXIT_REJECTED
    except WeylError as e:
        print(f"❌ 阶段失败: {e}")
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
