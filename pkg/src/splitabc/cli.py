"""Command-line front end: ``splitabc run|converge|sweep-k0|stability-check|preset``."""
from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from .analysis import PotentialDecomposition, normal_mode_roots, order3_dispersion_residual
from .config import ORDER_ALIASES, PRESETS, dumps_config, preset
from .core import ConfigError, PhysicalParams
from .experiments import convergence_table, emit_csv, k0_sweep, run_example
from .solver import BlowUpError, PicardDivergenceError, SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_BLOWUP = 4
EXIT_SOLVER = 5

log = logging.getLogger("splitabc")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _override(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"override must look like section.key=value, got {text!r}")
    return key.strip(), value.strip()


def _suffix(args) -> str:
    if not args.timestamp:
        return ""
    return "_" + datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out-dir", type=Path, default=Path("out"), help="directory for CSV output (default: out)")
    p.add_argument("--timestamp", action="store_true", help="append a UTC timestamp to output file names")
    p.add_argument("--seed", type=int, default=None, help="reserved; runs are deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splitabc", description="1D NLS with split nonlinear absorbing boundaries")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or an INI config file")
    run.add_argument("target", help=f"preset ({', '.join(PRESETS)}) or path to a config file")
    run.add_argument("--override", "-o", type=_override, action="append", default=[], metavar="SECTION.KEY=VALUE")
    run.add_argument("--dx", type=float)
    run.add_argument("--dt", type=float)
    run.add_argument("--k0", type=float, help="wavenumber parameter on both sides")
    run.add_argument("--order", choices=sorted(ORDER_ALIASES))
    run.add_argument("--t-final", type=float)
    run.add_argument("--snapshots", type=_floats, default=[], help="t1,t2,... snapshot times")
    _common(run)

    conv = sub.add_parser("converge", help="L1 error table with dt = dx^2 (example1)")
    conv.add_argument("--dx-list", type=_floats, default=[0.2, 0.1, 0.05])
    conv.add_argument("--times", type=_floats, default=[2.0, 3.0, 4.0, 5.0, 6.0])
    conv.add_argument("--workers", type=int, default=1)
    _common(conv)

    sweep = sub.add_parser("sweep-k0", help="final reflection ratio versus k0 (example1)")
    sweep.add_argument("--k0-list", type=_floats, default=[0.5, 1.0, 1.5, 2.0, 2.125, 2.5, 3.0, 4.0, 5.0])
    sweep.add_argument("--g-list", type=_floats, default=[-2.0, -10.0])
    sweep.add_argument("--dx", type=float, default=0.1)
    sweep.add_argument("--dt", type=float, default=0.05)
    sweep.add_argument("--t-final", type=float, default=6.0)
    sweep.add_argument("--workers", type=int, default=1)
    _common(sweep)

    stab = sub.add_parser("stability-check", help="normal-mode roots at the right boundary")
    stab.add_argument("--order", type=int, choices=(2, 3), default=3)
    stab.add_argument("--k0", type=float, default=2.0)
    stab.add_argument("--v1", type=float, default=0.0)
    stab.add_argument("--v2", type=float, default=0.0)
    stab.add_argument("--f1", type=float, default=0.0)
    stab.add_argument("--f2", type=float, default=0.0)
    stab.add_argument("--hbar", type=float, default=1.0)
    stab.add_argument("--mass", type=float, default=0.5)

    show = sub.add_parser("preset", help="print a preset as an INI config file")
    show.add_argument("name", choices=sorted(PRESETS))
    return parser


def _cmd_run(args) -> int:
    overrides = dict(args.override)
    if args.dx is not None:
        overrides["grid.dx"] = args.dx
    if args.dt is not None:
        overrides["grid.dt"] = args.dt
    if args.t_final is not None:
        overrides["grid.t_final"] = args.t_final
    if args.k0 is not None:
        overrides["boundary.k0"] = args.k0
    if args.order is not None:
        overrides["boundary.order"] = args.order
    result = run_example(args.target, overrides, args.snapshots, args.out_dir, suffix=_suffix(args))
    obs = result.observables
    print(f"steps={result.config.grid.N} t_final={obs.times[-1]:.6g} "
          f"mass_ratio={obs.mass[-1] / obs.mass[0]:.4e} r={obs.reflection[-1]:.4e} r_sq={obs.reflection_sq[-1]:.4e} "
          f"max_picard={obs.iterations.max()}")
    for f in result.files:
        print(f)
    return EXIT_OK


def _cmd_converge(args) -> int:
    table = convergence_table(args.dx_list, args.times, workers=args.workers)
    path = emit_csv(table, args.out_dir / f"converge_example1{_suffix(args)}.csv")
    for t, dx, _, e, order in table.rows:
        print(f"t={t:g} dx={dx:g} E1={e:.4e} order={'--' if order is None else f'{order:.3f}'}")
    print(path)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    table = k0_sweep(args.k0_list, args.g_list, dt=args.dt, t_final=args.t_final, dx=args.dx, workers=args.workers)
    path = emit_csv(table, args.out_dir / f"sweep-k0_example1{_suffix(args)}.csv")
    for g, k0, r, r2 in table.rows:
        print(f"g={g:g} k0={k0:g} r={r:.4e} r_sq={r2:.4e}")
    print(path)
    return EXIT_OK


def _cmd_stability(args) -> int:
    physics = PhysicalParams(args.hbar, args.mass, 0.0)
    decomp = PotentialDecomposition(args.v1, args.v2, args.f1, args.f2)
    res = normal_mode_roots(args.order, args.k0, decomp, physics)
    print(f"order={res.order}")
    print(f"k={res.k.real:.12g}{res.k.imag:+.12g}i")
    print(f"s={res.s.real:.12g}{res.s.imag:+.12g}i")
    print(f"Re(s)={res.s.real:.6e}")
    if res.order == 3:
        print(f"dispersion_residual={abs(order3_dispersion_residual(res.k, args.k0, physics)):.3e}")
    print(f"wellposed={'yes' if res.wellposed else 'no'}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {
        "run": _cmd_run,
        "converge": _cmd_converge,
        "sweep-k0": _cmd_sweep,
        "stability-check": _cmd_stability,
        "preset": lambda a: print(dumps_config(preset(a.name)), end="") or EXIT_OK,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PicardDivergenceError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
