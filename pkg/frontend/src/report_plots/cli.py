"""Command-line surface: `report-plots sweep` and `report-plots run`.

Exit codes: 0 success, 1 schema violation / empty input / bad flags,
2 filesystem failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import EmptyInput, SchemaError
from .figures import FigureSpec, plot_run, plot_sweep

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="report-plots",
        description="Render figures from fenesim CSV outputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="excess/complementarity decay over gamma")
    sw.add_argument("sweep_csv", help="sweep table written by the simulator")
    sw.add_argument("out_image", help="output image path (.png or .svg)")
    sw.add_argument("--p-norms", dest="p_norms", default="1,2,4",
                    help="which excess norms to draw (subset of 1,2,4)")

    rn = sub.add_parser("run", help="energy time series and final profiles")
    rn.add_argument("diagnostics_csv", help="per-step diagnostics table")
    rn.add_argument("snapshots_dir", help="directory holding snapshot_*.csv")
    rn.add_argument("out_dir", help="directory for the rendered figures")
    rn.add_argument("--delta", type=float, default=0.01,
                    help="congestion shading width: shade rho > 1 - delta")
    return parser


def _spec_from(args) -> FigureSpec:
    kwargs = {}
    if getattr(args, "p_norms", None) is not None:
        try:
            kwargs["p_norms"] = tuple(int(p) for p in args.p_norms.split(",")
                                      if p.strip())
        except ValueError:
            raise ValueError(f"--p-norms: expected integers from 1,2,4, "
                             f"got {args.p_norms!r}") from None
    if getattr(args, "delta", None) is not None:
        kwargs["delta"] = args.delta
    return FigureSpec(**kwargs)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        spec = _spec_from(args)
        if args.command == "sweep":
            path = plot_sweep(args.sweep_csv, args.out_image, spec)
            print(f"wrote {path}")
        else:
            for path in plot_run(args.diagnostics_csv, args.snapshots_dir,
                                 args.out_dir, spec):
                print(f"wrote {path}")
        return 0
    except (SchemaError, EmptyInput, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
