"""Command-line front end: config loading, subcommand dispatch, CSV/PPM
emission.  Single-threaded by design; --threads is accepted so batch scripts
can pass it, but outputs never depend on it.

Exit codes: 0 success, 1 other computation error, 2 config error,
3 no repelling seed, 4 pressure never crosses zero, 5 critical preimage,
6 open-set-condition failure, 7 hyperbolicity unverified.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .config import RunConfig, emit, parse_file
from .dynamics import check_hyperbolic, julia_backward_cloud, repelling_seed
from .errors import (
    ConfigError,
    CriticalPreimage,
    HyperbolicityUnverified,
    InsufficientPoints,
    NoRepellingSeed,
    NoSignChange,
    RatsemiError,
)
from .families import smoothness_diagnostic, submean_diagnostic, sweep_delta
from .geometry import box_dimension, osc_check
from .thermo import PreimageTree, bowen_parameter, lyapunov_and_entropy, pressure_curve

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NO_SEED = 3
EXIT_NO_SIGN_CHANGE = 4
EXIT_CRITICAL_PREIMAGE = 5
EXIT_OSC_FAIL = 6
EXIT_HYPERBOLICITY = 7


def _g17(x) -> str:
    return f"{float(x):.17g}"


def _fmt_point(pt) -> str:
    if pt.is_infinite:
        return "inf"
    z = pt.value
    return f"{z.real:.6g}{z.imag:+.6g}i"


def _atomic_write(path: str, data: bytes) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_csv(path: str, header: str, rows) -> None:
    text = header + "\n" + "".join(r + "\n" for r in rows)
    _atomic_write(path, text.encode("ascii"))


# ---------------------------------------------------------------------------
# subcommands


def cmd_julia(cfg: RunConfig, args) -> int:
    mm = cfg.multimap()
    ju = cfg.data["julia"]
    rn = cfg.data["render"]
    cloud = julia_backward_cloud(
        mm, depth=ju["depth"], cap=ju["cap"], rng_seed=ju["rng_seed"]
    )
    z, depths = cloud.finite_points()
    n_inf = cloud.size - z.size
    if z.size == 0:
        raise RatsemiError("cloud has no finite points to render")
    xmin, xmax = float(z.real.min()), float(z.real.max())
    ymin, ymax = float(z.imag.min()), float(z.imag.max())
    if rn["viewport"] is not None:
        vx0, vx1, vy0, vy1 = rn["viewport"]
    else:
        # pad the bounding box so boundary points stay visible
        pad = 0.05 * max(xmax - xmin, ymax - ymin, 1e-9)
        vx0, vx1, vy0, vy1 = xmin - pad, xmax + pad, ymin - pad, ymax + pad

    w, h = rn["width"], rn["height"]
    img = np.full((h, w, 3), 255, dtype=np.uint8)
    px = np.floor((z.real - vx0) / (vx1 - vx0) * w).astype(np.int64)
    py = np.floor((vy1 - z.imag) / (vy1 - vy0) * h).astype(np.int64)
    keep = (px >= 0) & (px < w) & (py >= 0) & (py < h)
    px, py, dep = px[keep], py[keep], depths[keep]
    order = np.argsort(dep, kind="stable")  # deeper levels overwrite
    px, py, dep = px[order], py[order], dep[order]
    if rn["depth_coloring"] and cloud.depth > 0:
        f = dep / float(cloud.depth)
        col = np.stack(
            [
                np.round(230 * (1.0 - f)).astype(np.uint8),
                np.full(f.size, 30, dtype=np.uint8),
                np.round(230 * f).astype(np.uint8),
            ],
            axis=1,
        )
    else:
        col = np.zeros((px.size, 3), dtype=np.uint8)
    img[py, px] = col
    out = args.out or rn["out"]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    _atomic_write(out, header + img.tobytes())

    r = np.abs(z)
    meta = cloud.meta
    print(f"points {z.size} finite + {n_inf} at infinity ({cloud.size} total, depth {cloud.depth})")
    print(f"bounding box [{xmin:.6g}, {xmax:.6g}] x [{ymin:.6g}, {ymax:.6g}]")
    print(f"radial range [{float(r.min()):.6g}, {float(r.max()):.6g}]")
    print(f"seed {_fmt_point(meta['seed_point'])} from generator {meta['seed_generator']}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_bowen(cfg: RunConfig, args) -> int:
    mm = cfg.multimap()
    tcfg = cfg.thermo_config()
    rep = check_hyperbolic(
        mm,
        depth=tcfg.hyper_depth,
        margin=tcfg.hyper_margin,
        cap=tcfg.hyper_cap,
        rng_seed=tcfg.rng_seed,
    )
    dist = rep.metrics.get("min_distance", math.nan)
    hyper_line = (
        f"hyperbolicity {rep.verdict} "
        f"(min postcritical-to-cloud distance {dist:.6g}, margin {rep.margin:.6g})"
    )
    if rep.verdict != "pass" and not tcfg.force:
        print(hyper_line)
        print("refusing to report a Bowen parameter; set thermo.force to override")
        return EXIT_HYPERBOLICITY
    res = bowen_parameter(mm, tcfg, force=True)  # the gate already ran above
    lo, hi = res.bracket
    print(f"delta = {res.delta:.10g} +/- {res.delta_error:.3g}")
    print(f"bracket = [{lo:.10g}, {hi:.10g}]")
    print(
        f"pressure at delta = {res.pressure_at_delta:.6g} "
        f"(residual {res.pressure_residual:.6g})"
    )
    print(f"depth = {res.depth}, bisection iterations = {res.iterations}")
    print(hyper_line)
    if res.delta - res.delta_error > 2.0:
        print(
            "note: delta exceeds 2 beyond its error bar, so no open set in the "
            "plane can satisfy the open set condition for this system"
        )
    if args.out:
        _write_csv(
            args.out,
            "delta,bracket_lo,bracket_hi,pressure_at_delta,pressure_residual,delta_error,depth",
            [
                ",".join(
                    [_g17(res.delta), _g17(lo), _g17(hi), _g17(res.pressure_at_delta),
                     _g17(res.pressure_residual), _g17(res.delta_error), str(res.depth)]
                )
            ],
        )
        print(f"wrote {args.out}")
    return EXIT_OK


def _emit_t_csv(rows, out) -> None:
    header = "t,value,residual,depth"
    lines = [",".join(r) for r in rows]
    text = header + "\n" + "".join(l + "\n" for l in lines)
    sys.stdout.write(text)
    if out:
        _atomic_write(out, text.encode("ascii"))


def cmd_pressure(cfg: RunConfig, args) -> int:
    mm = cfg.multimap()
    tcfg = cfg.thermo_config()
    ests = pressure_curve(
        mm,
        cfg.data["t_values"],
        z=cfg.basepoint(),
        n=tcfg.depth,
        cap=tcfg.cap,
        rng_seed=tcfg.rng_seed,
        rtol=tcfg.rtol_pressure,
    )
    _emit_t_csv(
        [(_g17(e.t), _g17(e.value), _g17(e.residual), str(e.depth)) for e in ests],
        args.out,
    )
    return EXIT_OK


def cmd_poincare(cfg: RunConfig, args) -> int:
    mm = cfg.multimap()
    tcfg = cfg.thermo_config()
    N = cfg.data["poincare_N"]
    base = cfg.basepoint()
    if base is None:
        base = repelling_seed(mm)[0]
    tree = PreimageTree(mm, base, cap=tcfg.cap, rng_seed=tcfg.rng_seed)
    rows = []
    for t in cfg.data["t_values"]:
        logs = [tree.log_level_sum(float(t), n) for n in range(1, N + 1)]
        value = math.fsum(math.exp(s) for s in logs)
        ratios = [b - a for a, b in zip(logs, logs[1:])][-3:]
        residual = max(ratios) - min(ratios) if len(ratios) >= 3 else math.inf
        rows.append((_g17(t), _g17(value), _g17(residual), str(N)))
    _emit_t_csv(rows, args.out)
    return EXIT_OK


def cmd_lyap(cfg: RunConfig, args) -> int:
    mm = cfg.multimap()
    tcfg = cfg.thermo_config()
    rows = []
    for t in cfg.data["t_values"]:
        diag = lyapunov_and_entropy(
            mm,
            float(t),
            h=cfg.data["lyap_h"],
            n=tcfg.depth,
            z=cfg.basepoint(),
            cap=tcfg.cap,
            rng_seed=tcfg.rng_seed,
        )
        rows.append((_g17(diag.t), _g17(diag.lyapunov), _g17(diag.residual), str(diag.depth)))
    _emit_t_csv(rows, args.out)
    return EXIT_OK


def cmd_osc(cfg: RunConfig, args) -> int:
    mm = cfg.multimap()
    U = cfg.region()
    oc = cfg.data["osc"]
    rep = osc_check(
        mm,
        U,
        grid_n=oc["grid_n"],
        variant=oc["variant"],
        epsilon=oc["epsilon"],
        enlarge=oc["enlarge"],
    )
    print(
        f"osc {rep.verdict} (variant {oc['variant']}, grid {oc['grid_n']}, "
        f"spacing {rep.margin:.6g}, {rep.metrics['samples']} samples)"
    )
    print(
        f"violations: nesting {rep.metrics['violations_nesting']}, "
        f"overlap {rep.metrics['violations_overlap']}"
    )
    for pt, detail in rep.witnesses:
        print(f"witness {_fmt_point(pt)}: {detail}")
    return EXIT_OK if rep.passed else EXIT_OSC_FAIL


def cmd_sweep(cfg: RunConfig, args) -> int:
    fam = cfg.family_spec()
    grid = cfg.grid_spec()
    table = sweep_delta(fam, grid, cfg.thermo_config())
    rows = []
    for r in table.rows:
        rows.append(
            ",".join(
                [
                    _g17(r.lam.real),
                    _g17(r.lam.imag),
                    _g17(r.delta) if r.status == "ok" else "",
                    _g17(r.pressure_residual) if r.status == "ok" else "",
                    str(r.depth) if r.status == "ok" else "",
                    r.status,
                ]
            )
        )
    out = args.out or cfg.data["sweep"]["out"]
    _write_csv(out, "re_lambda,im_lambda,delta,pressure_residual,depth,status", rows)
    n_ok = sum(1 for r in table.rows if r.status == "ok")
    print(f"wrote {out} ({len(table.rows)} rows, {n_ok} ok)")

    sub = submean_diagnostic(table, radius=cfg.data["sweep"]["submean_radius"])
    print(
        f"submean {sub.verdict}: worst violation {sub.worst_violation:.6g}, "
        f"reciprocal {sub.worst_reciprocal_violation:.6g} "
        f"(tol_sub {sub.tol_sub:.6g}, centers {sub.centers_checked})"
    )
    line = cfg.data["sweep"]["smooth_line"]
    if line is None:
        line = ["col", grid.im_n // 2]
    try:
        smooth = smoothness_diagnostic(
            table, (line[0], line[1]), fit_degree=cfg.data["sweep"]["fit_degree"]
        )
    except InsufficientPoints as e:
        print(f"smoothness skipped: {e}")
    else:
        print(
            f"smoothness ({line[0]} {line[1]}): max residual {smooth.max_residual:.6g} "
            f"= {smooth.residual_ratio:.3g}x error scale {smooth.error_scale:.6g} "
            f"over {smooth.points_used} points"
        )
        if smooth.min_psh_indicator is not None:
            print(
                f"psh indicator min {smooth.min_psh_indicator:.6g} "
                f"(noise estimate {smooth.psh_noise:.6g}) "
                f"at {smooth.psh_argmin.real:.6g}{smooth.psh_argmin.imag:+.6g}i"
            )
    return EXIT_OK


def cmd_boxdim(cfg: RunConfig, args) -> int:
    mm = cfg.multimap()
    ju = cfg.data["julia"]
    bx = cfg.data["boxdim"]
    cloud = julia_backward_cloud(
        mm, depth=ju["depth"], cap=ju["cap"], rng_seed=ju["rng_seed"]
    )
    res = box_dimension(cloud, scale_count=bx["scale_count"], viewport=bx["viewport"])
    print(f"box dimension slope = {res.slope:.6g} (r^2 = {res.r_squared:.6g})")
    print("scale,count")
    rows = []
    for eps, count in zip(res.scales, res.counts):
        line = f"{_g17(eps)},{count}"
        print(line)
        rows.append(line)
    if args.out:
        _write_csv(args.out, "scale,count", rows)
        print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# dispatch


_COMMANDS = (
    ("julia", cmd_julia, "render a backward-orbit Julia cloud to a PPM image"),
    ("bowen", cmd_bowen, "solve for the Bowen parameter (pressure zero)"),
    ("pressure", cmd_pressure, "pressure estimates over the configured t grid"),
    ("poincare", cmd_poincare, "truncated Poincare series over the t grid"),
    ("lyap", cmd_lyap, "Lyapunov exponents of the Gibbs state over the t grid"),
    ("osc", cmd_osc, "sampled open-set-condition check for the configured region"),
    ("sweep", cmd_sweep, "Bowen parameter over a parameter grid, with diagnostics"),
    ("boxdim", cmd_boxdim, "box-counting dimension of the Julia cloud"),
)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ratsemi",
        description="thermodynamic-formalism toolkit for rational map semigroups",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, help_text in _COMMANDS:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to a JSON run config")
        p.add_argument("--out", default=None, help="output file (overrides config)")
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help="accepted for compatibility; execution is single-threaded and "
            "outputs never depend on it",
        )
        p.add_argument("--seed", type=int, default=None,
                       help="override every rng seed in the config")
        p.add_argument("--depth", type=int, default=None,
                       help="override thermo and julia depth")
        p.add_argument("--verbose", action="store_true",
                       help="echo the normalized config to stderr")
        p.set_defaults(fn=fn)
    return ap


def _apply_flags(cfg: RunConfig, args) -> None:
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        cfg.data["rng_seed"] = args.seed
        cfg.data["thermo"]["rng_seed"] = args.seed
        cfg.data["julia"]["rng_seed"] = args.seed
    if args.depth is not None:
        if args.depth < 2:
            raise ConfigError("--depth must be at least 2")
        cfg.data["thermo"]["depth"] = args.depth
        cfg.data["julia"]["depth"] = args.depth


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_file(args.config)
        _apply_flags(cfg, args)
        if args.verbose:
            sys.stderr.write(emit(cfg))
        return args.fn(cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NoRepellingSeed as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_SEED
    except NoSignChange as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_SIGN_CHANGE
    except CriticalPreimage as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CRITICAL_PREIMAGE
    except HyperbolicityUnverified as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_HYPERBOLICITY
    except RatsemiError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
