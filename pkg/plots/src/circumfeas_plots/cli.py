"""Batch render CLI.

Usage:
    circumfeas-render --profile profile.csv --out fig.png [--svg]
    circumfeas-render --records map=traj_map.csv --records ccrm=traj_ccrm.csv --out decay.png
"""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, SchemaError, render_gap_decay, render_profile


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circumfeas-render",
                                     description="Render benchmark CSVs to figures.")
    parser.add_argument("--profile", type=str, default=None,
                        help="profile.csv to render as a performance profile")
    parser.add_argument("--records", action="append", default=[],
                        metavar="LABEL=PATH",
                        help="per-iterate trajectory CSV; repeat per method")
    parser.add_argument("--out", type=str, required=True)
    parser.add_argument("--svg", action="store_true")
    parser.add_argument("--label", action="append", default=[], metavar="METHOD=TEXT")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2

    if bool(args.profile) == bool(args.records):
        print("error: give exactly one of --profile or --records", file=sys.stderr)
        return 2

    labels = {}
    for item in args.label:
        if "=" not in item:
            print(f"error: --label wants METHOD=TEXT, got {item!r}", file=sys.stderr)
            return 2
        key, text = item.split("=", 1)
        labels[key] = text

    try:
        if args.profile:
            spec = PlotSpec(profile_path=args.profile, out_path=args.out,
                            svg=args.svg, labels=labels)
            out = render_profile(spec)
        else:
            traj = {}
            for item in args.records:
                if "=" not in item:
                    print(f"error: --records wants LABEL=PATH, got {item!r}", file=sys.stderr)
                    return 2
                key, path = item.split("=", 1)
                traj[key] = path
            spec = PlotSpec(trajectory_paths=traj, out_path=args.out,
                            svg=args.svg, labels=labels)
            out = render_gap_decay(spec)
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"i/o failure: {err}", file=sys.stderr)
        return 4
    print(f"render: wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
