"""Command-line surface: check-potential, run, sweep, report.

Exit codes: 0 success, 1 validation failure (bad flags, bad config, failed
certification, missing inputs), 2 runtime failure inside a simulation.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from .config import format_config, parse_config_file
from .coupled import run
from .errors import FenesimError, ValidationError
from .io_formats import (read_diagnostics, read_sweep, write_diagnostics,
                         write_snapshot, write_sweep)
from .limit import gamma_sweep
from .potentials import certify_potential, spring_model

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fenesim",
        description="Micro-macro polymer flow simulator: compressible fluid "
                    "coupled to a FENE configuration-density solver.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cp = sub.add_parser("check-potential",
                        help="certify the spring potential hypotheses")
    cp.add_argument("--b", required=True,
                    help="extensibility parameter(s), comma separated")
    cp.add_argument("--d", type=int, default=1, help="configuration dimension")

    rn = sub.add_parser("run", help="integrate one configuration")
    rn.add_argument("--config", required=True, help="path to the config file")
    rn.add_argument("--out", required=True, help="output directory")

    sw = sub.add_parser("sweep", help="run the exponent ladder")
    sw.add_argument("--gammas", default=None,
                    help="comma-separated ascending exponents (overrides config)")
    sw.add_argument("--config", required=True, help="path to the config file")
    sw.add_argument("--out", required=True, help="output directory")
    sw.add_argument("--p-norms", dest="p_norms", default="1,2,4",
                    help="which excess norms to print (subset of 1,2,4)")

    rp = sub.add_parser("report", help="summarize an output directory to stdout")
    rp.add_argument("out_dir", help="directory produced by run or sweep")
    return parser


def _cmd_check_potential(args) -> int:
    try:
        bs = tuple(float(p) for p in args.b.split(",") if p.strip())
    except ValueError:
        raise ValidationError([f"--b: expected comma-separated numbers, got {args.b!r}"])
    if not bs:
        raise ValidationError(["--b: need at least one value"])
    model = spring_model(K=len(bs), b=bs if len(bs) > 1 else bs[0], d=args.d)
    certs = certify_potential(model)
    all_ok = True
    for i, cert in enumerate(certs, start=1):
        verdict = "PASS" if cert.passed else "FAIL"
        all_ok = all_ok and cert.passed
        print(f"spring {i}: b={cert.b:g} theta={cert.theta:g} "
              f"c1={cert.c1:.6g} c2={cert.c2:.6g} c3={cert.c3:.6g} c4={cert.c4:.6g} "
              f"moment={cert.moment_bound:.6g} {verdict}")
    return 0 if all_ok else 1


def _cmd_run(args) -> int:
    cfg = parse_config_file(args.config)
    result = run(cfg)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "config.cfg"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(format_config(result.config))
    write_diagnostics(result.rows, os.path.join(args.out, "diagnostics.csv"))
    for i, snap in enumerate(result.snapshots):
        write_snapshot(snap, os.path.join(args.out, f"snapshot_{i:04d}.csv"))
    check = result.energy_check()
    print(f"steps={result.step_count} final_time={result.final.time:g} "
          f"snapshots={len(result.snapshots)} "
          f"energy_start={result.history[0].full_energy():.6g} "
          f"energy_end={result.history[-1].full_energy():.6g} "
          f"energy_inequality={'ok' if check.ok else 'violated'}")
    return 0


def _parse_pnorms(text: str) -> tuple[int, ...]:
    try:
        ps = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ValidationError([f"--p-norms: expected integers from 1,2,4, got {text!r}"])
    if not ps or any(p not in (1, 2, 4) for p in ps):
        raise ValidationError(
            [f"--p-norms: the frozen sweep schema carries p in 1,2,4, got {text!r}"]
        )
    return ps


def _cmd_sweep(args) -> int:
    cfg = parse_config_file(args.config)
    pnorms = _parse_pnorms(args.p_norms)
    gammas = None
    if args.gammas is not None:
        try:
            gammas = tuple(float(p) for p in args.gammas.split(",") if p.strip())
        except ValueError:
            raise ValidationError(
                [f"--gammas: expected comma-separated numbers, got {args.gammas!r}"]
            )
    report = gamma_sweep(cfg, gammas)
    os.makedirs(args.out, exist_ok=True)
    write_sweep(report, os.path.join(args.out, "sweep.csv"))
    for row in report.rows:
        norms = " ".join(f"excess_l{p}={getattr(row, f'excess_l{p}'):.6g}"
                         for p in pnorms)
        print(f"gamma={row.gamma:g} {norms} complementarity={row.complementarity:.6g} "
              f"max_rho={row.max_rho:.6g} status={row.status}")
    return 0 if any(r.status == "ok" for r in report.rows) else 2


def _cmd_report(args) -> int:
    diag_path = os.path.join(args.out_dir, "diagnostics.csv")
    sweep_path = os.path.join(args.out_dir, "sweep.csv")
    found = False
    if os.path.exists(diag_path):
        found = True
        cols = read_diagnostics(diag_path)
        n = len(cols["step"])
        print(f"run: {n} steps")
        if n:
            drift = abs(cols["mass_rho"][-1] - cols["mass_rho"][0])
            rel = drift / max(abs(cols["mass_rho"][0]), 1e-300)
            print(f"  final_time={cols['time'][-1]:.6g}")
            print(f"  mass_rho_drift={rel:.3e} (relative, first to last row)")
            print(f"  energy: {cols['energy_total'][0]:.6g} -> "
                  f"{cols['energy_total'][-1]:.6g}")
            print(f"  sup_rho={max(cols['sup_rho']):.6g} "
                  f"excess_l2_final={cols['excess_l2'][-1]:.6g}")
            print(f"  eta_consistency_l1_final={cols['eta_consistency_l1'][-1]:.6g}")
    if os.path.exists(sweep_path):
        found = True
        report = read_sweep(sweep_path)
        print(f"sweep: {len(report.rows)} exponents")
        for row in report.rows:
            print(f"  gamma={row.gamma:g} excess_l2={row.excess_l2:.6g} "
                  f"complementarity={row.complementarity:.6g} "
                  f"congestion_fraction={row.congestion_fraction:.6g} "
                  f"status={row.status}")
        ratios = report.decay_ratios()
        if ratios.size and not all(math.isnan(r) for r in ratios):
            print("  excess_l2 decay ratios: "
                  + " ".join(f"{r:.4g}" for r in ratios))
    if not found:
        raise ValidationError(
            [f"{args.out_dir}: no diagnostics.csv or sweep.csv found"]
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    handlers = {
        "check-potential": _cmd_check_potential,
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except ValidationError as exc:
        for line in str(exc).splitlines():
            print(f"error: {line}", file=sys.stderr)
        return 1
    except FenesimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
