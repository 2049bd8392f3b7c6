"""Command-line interface: generate, solve, audit, bench, profile.

Exit codes: 0 success, 2 usage error, 3 solver abort on a rank-deficient
circumcenter, 4 I/O failure.  All randomness flows from --seed; outputs are
written atomically (write-then-rename) so failures leave no partial files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .audit import AUDIT_CHECKS, run_audits
from .bench import (
    BenchmarkReport,
    RunRecord,
    STOP_POLICIES,
    performance_profile,
    run_suite,
    write_profile_csv,
    write_records_csv,
    write_stats_csv,
    write_timings_csv,
)
from .instances import (
    GeneratorConfig,
    gen_suite,
    instance_to_dict,
    load_instance,
)
from .methods import (
    GapToFirstSet,
    MethodKind,
    ProjectionBudget,
    RankDeficientError,
    run,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER_ABORT = 3
EXIT_IO = 4


def _threads_from_env() -> int:
    raw = os.environ.get("CIRCUMFEAS_THREADS", "")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise SystemExit(f"CIRCUMFEAS_THREADS must be an integer, got {raw!r}")
    return 1


def _atomic_json(path: str, payload: dict) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _atomic_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circumfeas",
        description="Two-set convex feasibility: circumcenter methods, audits, benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1234)
    common.add_argument("--dim", type=int, default=100)
    common.add_argument("--out", type=str, default=None)
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p_gen = sub.add_parser("gen", parents=[common], help="generate a seeded instance suite")
    p_gen.add_argument("--count", type=int, default=30)
    p_gen.add_argument("--lambda", dest="lam", type=float, default=1.1)

    p_solve = sub.add_parser("solve", parents=[common], help="run one method on one instance")
    p_solve.add_argument("--method", required=True,
                         choices=[m.value for m in MethodKind])
    p_solve.add_argument("--instance", required=True, type=str)
    p_solve.add_argument("--eps", type=float, default=1e-6)
    p_solve.add_argument("--budget", type=int, default=10_000)

    p_audit = sub.add_parser("audit", parents=[common], help="run invariant audits")
    p_audit.add_argument("--checks", type=str, default=",".join(AUDIT_CHECKS))
    p_audit.add_argument("--draws", type=int, default=1000)
    p_audit.add_argument("--eb-samples", type=int, default=20_000)

    p_bench = sub.add_parser("bench", parents=[common], help="run a benchmark suite")
    p_bench.add_argument("--suite", choices=tuple(STOP_POLICIES), default="interior")
    p_bench.add_argument("--count", type=int, default=30)
    p_bench.add_argument("--lambda", dest="lam", type=float, default=None)
    p_bench.add_argument("--methods", type=str, default="ccrm,map,crmprod")
    p_bench.add_argument("--eps", type=float, default=None)
    p_bench.add_argument("--budget", type=int, default=None)

    p_prof = sub.add_parser("profile", parents=[common],
                            help="recompute a performance profile from records.csv")
    p_prof.add_argument("--records", required=True, type=str)

    return parser


def cmd_gen(args) -> int:
    cfg = GeneratorConfig(n=args.dim, count=args.count, lam=args.lam, seed=args.seed)
    instances = gen_suite(cfg)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    files = []
    for inst in instances:
        name = f"{inst.instance_id}.json"
        _atomic_json(os.path.join(out_dir, name), instance_to_dict(inst))
        files.append(name)
    manifest = {
        "config": {"n": cfg.n, "count": cfg.count, "lambda": cfg.lam,
                   "gamma": cfg.gamma, "sparsity": cfg.sparsity, "seed": cfg.seed},
        "files": files,
    }
    _atomic_json(os.path.join(out_dir, "manifest.json"), manifest)
    print(f"gen: wrote {len(files)} instances and manifest.json to {out_dir}")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    method = MethodKind.parse(args.method)
    criteria = [GapToFirstSet(args.eps), ProjectionBudget(args.budget)]
    result = run(method, inst.e1, inst.e2, inst.z0, criteria)
    print(
        f"solve: method={method.value} instance={inst.instance_id} "
        f"projections={result.total_projections} iterations={result.iterations} "
        f"stop={result.stop_reason} residual={result.final_residual:.3e}"
    )
    if args.out:
        if args.format == "json":
            _atomic_json(args.out, result.summary())
        else:
            lines = ["iteration,gap,cumulative_projections"]
            for k, gap, cum in result.trajectory_rows(inst.e1):
                lines.append(f"{k},{gap!r},{cum}")
            _atomic_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_audit(args) -> int:
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    report = run_audits(checks, seed=args.seed, draws=args.draws,
                        eb_samples=args.eb_samples)
    payload = json.dumps(report, indent=2, default=float)
    if args.out:
        _atomic_text(args.out, payload + "\n")
    else:
        print(payload)
    print(f"audit: checks={','.join(checks)} passed={report['passed']}")
    return EXIT_OK if report["passed"] else 1


def cmd_bench(args) -> int:
    lam = args.lam
    if lam is None:
        lam = 1.1 if args.suite == "interior" else 1.0
    cfg = GeneratorConfig(n=args.dim, count=args.count, lam=lam, seed=args.seed)
    instances = gen_suite(cfg)
    methods = [MethodKind.parse(m) for m in args.methods.split(",") if m]
    report = run_suite(instances, methods, policy=args.suite, eps=args.eps,
                       budget=args.budget, threads=_threads_from_env())
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    write_records_csv(report, os.path.join(out_dir, "records.csv"))
    write_stats_csv(report, os.path.join(out_dir, "stats.csv"))
    write_profile_csv(report, os.path.join(out_dir, "profile.csv"))
    write_timings_csv(report, os.path.join(out_dir, "timings.csv"))
    for method in report.methods:
        s = report.stats[method]
        print(
            f"bench[{args.suite}]: {method} mean={s['mean']:.2f}±{s['std']:.2f} "
            f"median={s['median']:g} min={s['min']} max={s['max']} "
            f"solved={s['solved']}/{s['count']}"
        )
    return EXIT_OK


def cmd_profile(args) -> int:
    records = []
    with open(args.records, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        expected = ["method", "instance_id", "projections", "iterations",
                    "stop_reason", "final_residual"]
        if header != expected:
            raise ValueError(f"records.csv columns {header} != {expected}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != 6:
                continue
            records.append(RunRecord(
                method=parts[0], instance_id=parts[1], projections=int(parts[2]),
                iterations=int(parts[3]), stop_reason=parts[4],
                final_residual=float(parts[5]), wall_ms=0.0,
            ))
    methods = list(dict.fromkeys(r.method for r in records))
    report = BenchmarkReport(policy="from-records", methods=methods, records=records)
    out = args.out or "profile.csv"
    write_profile_csv(report, out)
    taus, fractions = performance_profile(report)
    at_one = {m: fractions[m][0] for m in methods}
    print(f"profile: wrote {out}; rho(1)={at_one}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses code 2 for usage errors
        return int(exc.code) if exc.code is not None else EXIT_USAGE

    handlers = {
        "gen": cmd_gen,
        "solve": cmd_solve,
        "audit": cmd_audit,
        "bench": cmd_bench,
        "profile": cmd_profile,
    }
    try:
        return handlers[args.subcommand](args)
    except RankDeficientError as err:
        print(f"solver abort: {err}", file=sys.stderr)
        return EXIT_SOLVER_ABORT
    except OSError as err:
        print(f"i/o failure: {err}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
