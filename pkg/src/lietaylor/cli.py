"""Command-line front end: ``lietaylor run|preset|stability|potential|verify``."""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from .dk_dynamics import ScheduleError
from .geometry import GeometryError, r3_from
from .integrator import IntegrationError
from .scenario import PRESETS, ConfigError, load_config, potential_report, preset, run
from .stability import aligned_spectrum, orthogonal_modes

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INTEGRATION = 2
EXIT_VERIFICATION = 3


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, help="trajectory CSV path (default <name>.csv)")
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--sample-dt", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--method", choices=("dp54", "rk4"))
    p.add_argument("--compat-stabpoly", action="store_true",
                   help="use the printed constant term in the stability snapshots")
    p.add_argument("--no-plot-data", action="store_true",
                   help="skip the per-variable two-column .dat files")
    p.add_argument("--figures", action="store_true",
                   help="also render PNG figures next to the CSV (needs matplotlib)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lietaylor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a scenario described by a config file")
    p.add_argument("config", type=Path)
    _add_run_options(p)

    p = sub.add_parser("preset", help="run one of the built-in experiments")
    p.add_argument("name", choices=sorted(PRESETS))
    _add_run_options(p)

    p = sub.add_parser("stability", help="linear stability of aligned or orthogonal states")
    p.add_argument("--W", type=float, help="aligned vorticity")
    p.add_argument("--J", type=float, help="aligned current")
    p.add_argument("--r1", type=float)
    p.add_argument("--r2", type=float)
    p.add_argument("--X", type=float, help="orthogonal vorticity")
    p.add_argument("--K", type=float, help="orthogonal current")
    p.add_argument("--r", type=float, nargs="+", metavar="R",
                   help="r1 r2 [r3] for the orthogonal case")
    p.add_argument("--compat-stabpoly", action="store_true")
    p.add_argument("--format", choices=("text", "csv"), default="text")

    p = sub.add_parser("potential", help="effective-potential coefficients of the Euler dynamics")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS), default=None)
    src.add_argument("--config", type=Path)
    p.add_argument("--t", type=float, default=0.0)

    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("suites", nargs="*", help="hierarchy, mass, conservation, algebra, reduction")
    p.add_argument("--seed", type=int, default=12345)
    return parser


def _overrides(args) -> dict:
    return {
        "rtol": args.rtol, "atol": args.atol, "sample_dt": args.sample_dt,
        "t_end": args.t_end, "method": args.method,
    }


def _cmd_run(args) -> int:
    if args.command == "preset":
        cfg = preset(args.name, **_overrides(args))
    else:
        from dataclasses import replace

        cfg = load_config(args.config)
        ov = {k: v for k, v in _overrides(args).items() if v is not None}
        if ov:
            cfg = replace(cfg, **ov)
    out = args.out if args.out is not None else Path(f"{cfg.name}.csv")
    report, _ = run(cfg, out=out, plot_data=not args.no_plot_data, figures=args.figures,
                    compat_stabpoly=args.compat_stabpoly)
    print(report.text())
    return EXIT_OK


def _cmd_stability(args) -> int:
    aligned = [args.W, args.J, args.r1, args.r2]
    if all(v is not None for v in aligned) and args.X is None:
        rep = aligned_spectrum(args.W, args.J, args.r1, args.r2, compat=args.compat_stabpoly)
        rows = [
            ("case", "aligned"), ("W", rep.W), ("J", rep.J), ("r1", rep.r1), ("r2", rep.r2),
            ("beta", rep.beta), ("c", rep.c), ("discriminant", rep.discriminant),
            ("x1", rep.x_roots[0]), ("x2", rep.x_roots[1]),
            ("classification", rep.classification),
            ("frequencies", " ".join(f"{f:.6g}" for f in rep.frequencies)),
            ("growth_rate", rep.growth_rate), ("r2_threshold", rep.r2_threshold),
            ("constant_term", "printed" if rep.compat else "corrected"),
        ]
    elif args.X is not None and args.K is not None and args.r:
        r = list(args.r)
        if len(r) == 2:
            r.append(r3_from(r[0], r[1]))
        if len(r) != 3:
            raise ConfigError("stability.r: give r1 r2 or r1 r2 r3")
        rep = orthogonal_modes(args.X, args.K, r)
        rows = [
            ("case", "orthogonal"), ("X", rep.X), ("K", rep.K),
            ("r", " ".join(f"{v:.6g}" for v in rep.r)),
            (f"omega3_{rep.omega3_kind}", rep.omega3_rate),
            ("iota_frequencies", " ".join(f"{v:.6g}" for v in rep.iota_frequencies)),
            ("branch_x", rep.branch_x), (f"branch_{rep.branch_kind}", rep.branch_rate),
        ]
    else:
        raise ConfigError("stability: give --W --J --r1 --r2, or --X --K --r")
    if args.format == "csv":
        w = csv.writer(sys.stdout)
        w.writerow(["quantity", "value"])
        for k, v in rows:
            w.writerow([k, _show(v)])
    else:
        for k, v in rows:
            print(f"{k:16s} {_show(v)}")
    return EXIT_OK


def _show(v) -> str:
    if isinstance(v, complex):
        if v.imag == 0.0:
            return f"{v.real:.10g}"
        return f"{v.real:.10g}{v.imag:+.10g}i"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.10g}"
    return str(v)


def _cmd_potential(args) -> int:
    cfg = load_config(args.config) if args.config else preset(args.preset or "euler-flopl")
    print(potential_report(cfg, args.t).text())
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_suites

    try:
        results = run_suites(args.suites, seed=args.seed)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFICATION


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run, "preset": _cmd_run, "stability": _cmd_stability,
        "potential": _cmd_potential, "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ScheduleError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IntegrationError as exc:
        print(f"integration failed at t = {exc.t:.6g}: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except RuntimeError as exc:
        # missing optional plotting dependency
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
