"""Command-line interface: ``polaron-fcs <command> [--config FILE] [--set section.key=value ...]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import closed_lz_unitary, lz_asymptotic
from .bath import QuadratureError, bath_propagator, gamma, kappa
from .config import ConfigError, RunConfig, load_config
from .dynamics_bench import export_trajectory, import_reference, run_comparison
from .evolve import CFGrid, SolverError, integrate_wco, sample_cf, write_sidecar
from .generator import FrequencyWindowError, build_context, equilibrium_state, lindbladian_apply
from .system import Frame, coupling_strength, validity_report, work_generator
from .workdist import cf_moments, jarzynski_check, moments, work_distribution

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("polaron_fcs")


def _outdir(cfg: RunConfig) -> Path:
    path = Path(cfg.run.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _persist_config(cfg: RunConfig, outdir: Path):
    cfg.to_ini(outdir / "config.ini")


def _context(cfg: RunConfig, frame=None):
    frame = cfg.frame if frame is None else Frame.parse(frame)
    return build_context(cfg.protocol, cfg.bath, frame, n_points=cfg.run.table_points)


def _frames(arg, cfg):
    if arg == "both":
        return [Frame.POLARON, Frame.WEAK]
    return [Frame.parse(arg) if arg else cfg.frame]


def _print_json(obj):
    print(json.dumps(obj, indent=2, default=str))


def cmd_kappa(cfg, args):
    k = kappa(cfg.bath)
    report = validity_report(cfg.protocol, cfg.bath, k)
    _print_json({"kappa": k, "g": coupling_strength(k, cfg.protocol.delta), "checks": report["checks"]})
    return EXIT_OK


def cmd_bath_tables(cfg, args):
    outdir = _outdir(cfg)
    for frame in _frames(args.frame, cfg):
        ctx = _context(cfg, frame)
        path = ctx.table.to_csv(outdir / f"rates_{frame.value}.csv")
        write_sidecar(path, {"frame": frame.value, "bath": asdict(cfg.bath), "kappa": ctx.kappa,
                             "window": list(ctx.table.window), "points": int(ctx.table.omega_grid.size)})
        print(path)
    _persist_config(cfg, outdir)
    return EXIT_OK


def cmd_cf(cfg, args):
    outdir = _outdir(cfg)
    for frame in _frames(args.frame, cfg):
        ctx = _context(cfg, frame)
        grid = sample_cf(cfg.cf.eta_max, cfg.cf.delta_eta, ctx, cfg.solver, threads=cfg.run.threads)
        path = grid.to_csv(outdir / f"cf_{frame.value}.csv")
        print(path)
    _persist_config(cfg, outdir)
    return EXIT_OK


def cmd_dist(cfg, args):
    outdir = _outdir(cfg)
    for frame in _frames(args.frame, cfg):
        cf_path = Path(args.cf) if args.cf else outdir / f"cf_{frame.value}.csv"
        grid = CFGrid.from_csv(cf_path)
        w_range = None if cfg.dist.w_min is None else (cfg.dist.w_min, cfg.dist.w_max)
        dist = work_distribution(grid, cfg.dist.delta_w, w_range, cfg.dist.window)
        path = dist.to_csv(outdir / f"dist_{frame.value}.csv")
        density_path = dist.write_density(outdir / f"density_{frame.value}.dat")
        write_sidecar(density_path, dict(dist.metadata, source=str(cf_path)))
        mom = moments(dist)
        print(json.dumps({"frame": frame.value, "file": str(path), "total": dist.total,
                          "negativity": dist.negativity, "mean": mom.mean, "variance": mom.variance}))
        if args.cf:
            break
    _persist_config(cfg, outdir)
    return EXIT_OK


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_moments(cfg, args):
    outdir = _outdir(cfg)
    rows = []
    for frame in (Frame.POLARON, Frame.WEAK):
        for alpha in _floats(args.alphas):
            for beta in _floats(args.betas):
                bath = replace(cfg.bath, alpha=alpha, beta=beta)
                ctx = build_context(cfg.protocol, bath, frame, n_points=cfg.run.table_points)
                mom = cf_moments(ctx, cfg.solver, h=args.h)
                rows.append((frame.value, alpha, beta, ctx.kappa, mom.mean * beta, mom.variance * beta**2))
    path = outdir / "moments.csv"
    with path.open("w") as fh:
        fh.write("frame,alpha,beta,kappa,mean_over_kT,variance_over_kT2\n")
        for r in rows:
            fh.write(",".join([r[0]] + [repr(float(v)) for v in r[1:]]) + "\n")
    write_sidecar(path, {"protocol": asdict(cfg.protocol), "omega_c": cfg.bath.omega_c,
                         "include_lamb_shift": cfg.bath.include_lamb_shift, "solver": asdict(cfg.solver),
                         "h": args.h, "table_points": cfg.run.table_points})
    for r in rows:
        print("%-8s alpha=%-6g beta=%-6g kappa=%.6g <W>/kT=%.6g var/(kT)^2=%.6g" % r)
    _persist_config(cfg, outdir)
    return EXIT_OK


def cmd_jarzynski(cfg, args):
    out = []
    for frame in _frames(args.frame, cfg):
        res = jarzynski_check(_context(cfg, frame), cfg.solver)
        out.append({"frame": frame.value, "lhs_re": res.lhs.real, "lhs_im": res.lhs.imag,
                    "rhs": res.rhs, "deviation": res.deviation})
    _print_json(out)
    return EXIT_OK


def cmd_dynamics(cfg, args):
    outdir = _outdir(cfg)
    times = np.linspace(cfg.protocol.t_i, cfg.protocol.t_f, args.points)
    rho0 = np.diag([1.0, 0.0]).astype(complex)  # |1><1|, the upper diabatic state
    refs = [import_reference(p, source=Path(p).stem) for p in (args.reference or [])]
    comp = run_comparison(cfg.protocol, cfg.bath, rho0, times=times, opts=cfg.solver, references=refs,
                          threads=cfg.run.threads)
    meta = {"protocol": asdict(cfg.protocol), "bath": asdict(cfg.bath), "kappa": kappa(cfg.bath),
            "solver": asdict(cfg.solver), "rho0": "|1><1|"}
    for name, traj in comp.trajectories.items():
        write_sidecar(export_trajectory(traj, outdir / f"sigma_z_{name}.csv"), dict(meta, source=name))
    report = comp.write_report(outdir / "dynamics_report.json")
    write_sidecar(report, meta)
    _print_json(comp.report())
    _persist_config(cfg, outdir)
    return EXIT_OK


def cmd_closed_lz(cfg, args):
    k_eff = kappa(cfg.bath) if cfg.frame is Frame.POLARON else 1.0
    res = closed_lz_unitary(cfg.protocol, k_eff, cfg.bath.beta)
    asym = lz_asymptotic(cfg.protocol, k_eff)
    _print_json({"kappa_eff": k_eff, "unitary": asdict(res), "asymptotic": asdict(asym)})
    return EXIT_OK


def _validation_checks(cfg):
    """Fast property checks on the configured parameters: (name, value, limit)."""
    bath, prot = cfg.bath, cfg.protocol
    k = kappa(bath)
    checks = [("phi(0) = -2 ln kappa", abs(bath_propagator(0.0, bath) + 2 * math.log(k)), 1e-10)]
    w = math.hypot(10.0, k)
    for ch in ("xx", "yy"):
        g_p, g_m = gamma(w, ch, bath), gamma(-w, ch, bath)
        rel = abs(g_m - math.exp(-bath.beta * w) * g_p) / max(abs(g_m), 1e-300) if bath.alpha > 0 else 0.0
        checks.append((f"KMS {ch}", rel, 1e-4))
    for frame in (Frame.POLARON, Frame.WEAK):
        ctx = _context(cfg, frame)
        for t in (prot.t_i, 0.0, prot.t_f):
            if prot.t_i <= t <= prot.t_f:
                res = np.abs(lindbladian_apply(t, equilibrium_state(t, ctx), ctx)).max()
                checks.append((f"fixed point {frame.value} t={t:g}", res, 1e-8))
        checks.append((f"trace Phi(0) {frame.value}", abs(np.trace(integrate_wco(0.0, ctx, cfg.solver)) - 1), 1e-8))
        checks.append((f"Jarzynski {frame.value}", jarzynski_check(ctx, cfg.solver).deviation, 1e-3))
    from scipy.linalg import expm  # finite-difference oracle only

    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        t = rng.uniform(prot.t_i, prot.t_f)
        eta = complex(rng.uniform(-5, 5), rng.uniform(0, bath.beta))
        h = lambda s: 0.5 * prot.omega0(s) * np.diag([1, -1]) + 0.5 * k * prot.delta * np.array([[0, 1], [1, 0]])
        d = 1e-6
        fd = (expm(1j * eta * h(t + d)) - expm(1j * eta * h(t - d))) / (2 * d) @ expm(-1j * eta * h(t))
        worst = max(worst, np.abs(fd - work_generator(t, eta, prot, Frame.POLARON, k)).max())
    checks.append(("work generator vs finite difference", worst, 1e-6))
    return checks


def cmd_validate(cfg, args):
    failed = 0
    for name, value, limit in _validation_checks(cfg):
        ok = value < limit
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.3e} (limit {limit:g})")
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


COMMANDS = {
    "kappa": (cmd_kappa, "print kappa, g and the validity diagnostics"),
    "bath-tables": (cmd_bath_tables, "build and export rate tables"),
    "cf": (cmd_cf, "sample the characteristic function"),
    "dist": (cmd_dist, "invert and bin a characteristic function"),
    "moments": (cmd_moments, "mean and variance of work over an (alpha, beta) grid, both frames"),
    "jarzynski": (cmd_jarzynski, "check <exp(-beta W)> = exp(-beta dF)"),
    "dynamics": (cmd_dynamics, "population dynamics comparison"),
    "closed-lz": (cmd_closed_lz, "closed-system Landau-Zener references"),
    "validate": (cmd_validate, "run fast property checks on the configuration"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="polaron-fcs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="INI configuration file (defaults reproduce the benchmark settings)")
    common.add_argument("-s", "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a configuration value (repeatable)")
    common.add_argument("-o", "--output-dir", help="shorthand for --set run.output_dir=...")
    common.add_argument("-j", "--threads", type=int, help="shorthand for --set run.threads=...")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name in ("bath-tables", "cf", "dist", "jarzynski"):
            p.add_argument("--frame", choices=("polaron", "weak", "both"),
                           help="frame(s) to run (default: run.frame from the config)")
        if name == "dist":
            p.add_argument("--cf", help="CF CSV to invert (default: output_dir/cf_<frame>.csv)")
        if name == "moments":
            p.add_argument("--alphas", default="0.1,0.25,0.4")
            p.add_argument("--betas", default="1.0")
            p.add_argument("--h", type=float, default=0.01, help="counting-field step for derivatives")
        if name == "dynamics":
            p.add_argument("--reference", action="append", help="external (t, sigma_z) CSV to compare")
            p.add_argument("--points", type=int, default=401)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = list(args.set)
    if args.output_dir:
        overrides.append(f"run.output_dir={args.output_dir}")
    if args.threads:
        overrides.append(f"run.threads={args.threads}")
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    handler = COMMANDS[args.command][0]
    try:
        return handler(cfg, args)
    except (ConfigError, FrequencyWindowError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, QuadratureError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
