"""Command-line front end: run, sweep, validate."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import runner, scenarios
from .config import SimConfig
from .errors import ConfigError, DryporeError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_ACCEPTANCE = 3


def _load_config(args) -> SimConfig:
    base = None
    if getattr(args, "scenario", None):
        base = scenarios.by_name(
            args.scenario, full_scale=getattr(args, "full_scale", False)
        ).config
    if getattr(args, "config", None):
        cfg = SimConfig.from_file(args.config, base=base)
    elif base is not None:
        cfg = base
    else:
        raise ConfigError("either --config or --scenario is required")
    if getattr(args, "out", None):
        cfg = cfg.replace(out_dir=args.out)
    return cfg


def cmd_run(args) -> int:
    cfg = _load_config(args)

    def progress(t, step):
        print(f"  t={t:.6g} ({t / cfg.t_end:6.1%})  step={step}", flush=True)

    manifest = runner.run(cfg, progress=progress if args.verbose else None)
    d = manifest.diagnostics
    print(f"run finished: {manifest.termination} after {d['steps']} steps "
          f"({manifest.wallclock:.1f} s)")
    print(f"  m={d['m']}  t_breakthrough={d['t_breakthrough']}  "
          f"Ca={d['Ca']}  Pe={d['Pe']}")
    print(f"  outputs in {cfg.out_dir}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    results = runner.sweep(cfg, args.axis, values)
    n_ok = sum(1 for r in results if r is not None)
    print(f"sweep over {args.axis}: {n_ok}/{len(values)} runs succeeded; "
          f"aggregate in {cfg.out_dir}/sweep.csv")
    return EXIT_OK


def _validate_bubble() -> list[tuple[str, bool, str]]:
    scen = scenarios.bubble_rise(32, 64)
    cfg = scen.config.replace(t_end=scen.config.t_end / 4.0, out_dir="out/validate-bubble")
    manifest = runner.run(cfg)
    totals = [r["binder_total"] for r in manifest.records]
    drift = max(abs(v - totals[0]) for v in totals) / abs(totals[0])
    coms = [r["phi_com_y"] for r in manifest.records]
    checks = [
        ("binder mass constant to 1e-6", drift < 1e-6, f"drift={drift:.3e}"),
        ("bubble rises", coms[-1] > coms[0],
         f"com_y {coms[0]:.4f} -> {coms[-1]:.4f}"),
    ]
    return checks


def _validate_capillary() -> list[tuple[str, bool, str]]:
    scen = scenarios.evaporating_capillary(12.5, 56, 56)
    cfg = scen.config.replace(t_end=scen.config.t_end / 4.0,
                              out_dir="out/validate-capillary")
    manifest = runner.run(cfg)
    totals = [r["binder_total"] for r in manifest.records]
    drift = max(abs(v - totals[0]) for v in totals) / abs(totals[0])
    phis = [r["phi_total"] for r in manifest.records]
    checks = [
        ("binder inventory constant to 1e-9", drift < 1e-9, f"drift={drift:.3e}"),
        ("solvent recedes monotonically",
         all(b <= a * (1 + 1e-12) for a, b in zip(phis, phis[1:])),
         f"phi_total {phis[0]:.4g} -> {phis[-1]:.4g}"),
    ]
    return checks


def cmd_validate(args) -> int:
    checks = _validate_bubble() if args.case == "bubble" else _validate_capillary()
    ok = True
    for name, passed, detail in checks:
        status = "PASS" if passed else "FAIL"
        print(f"[{status}] {args.case}: {name} ({detail})")
        ok = ok and passed
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="drypore", description="Pore-scale drying and binder migration simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single simulation")
    p_run.add_argument("--config", help="config file (key = value sections)")
    p_run.add_argument("--scenario", help="preset scenario name")
    p_run.add_argument("--out", help="output directory override")
    p_run.add_argument("--full-scale", action="store_true", dest="full_scale")
    p_run.add_argument("--verbose", action="store_true")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a one-axis parameter sweep")
    p_sweep.add_argument("--config", help="base config file")
    p_sweep.add_argument("--scenario", help="preset scenario name")
    p_sweep.add_argument("--axis", required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out", help="output directory override")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_val = sub.add_parser("validate", help="run a built-in validation case")
    p_val.add_argument("--case", required=True, choices=["bubble", "capillary"])
    p_val.set_defaults(fn=cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DryporeError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
