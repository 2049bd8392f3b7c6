"""Benchmark harness: method x instance grids, statistics, performance profiles.

Two named stopping policies mirror the experiment setups this package
reproduces: ``interior`` stops on a gap below 1e-6 to the first set within a
budget of 10000 projections; ``singleton`` stops within 1e-3 of the known
witness within 500000 projections.  Both accept overrides.

Projection counts are the performance measure.  Budget-exhausted runs enter
the descriptive statistics at their consumed projection count and enter
performance profiles with infinite cost.  Wall times are recorded but kept
out of records.csv so repeated runs are byte-identical; they land in
timings.csv instead.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .instances import EllipsoidInstance
from .methods import (
    DistanceToKnownSolution,
    GapToFirstSet,
    MethodKind,
    MethodRun,
    ProjectionBudget,
    run,
)
from .sets import DEFAULT_TOL

__all__ = [
    "STOP_POLICIES",
    "RunRecord",
    "BenchmarkReport",
    "run_suite",
    "summarize",
    "performance_profile",
    "write_records_csv",
    "write_stats_csv",
    "write_profile_csv",
    "write_timings_csv",
]

STOP_POLICIES = {
    "interior": {"eps": 1e-6, "budget": 10_000, "criterion": "gap"},
    "singleton": {"eps": 1e-3, "budget": 500_000, "criterion": "distance"},
}

DEFAULT_METHODS = (MethodKind.CCRM, MethodKind.MAP, MethodKind.CRMPROD)


@dataclass
class RunRecord:
    method: str
    instance_id: str
    projections: int
    iterations: int
    stop_reason: str
    final_residual: float
    wall_ms: float

    @property
    def solved(self) -> bool:
        return self.stop_reason in ("gap", "distance")

    @property
    def profile_cost(self) -> float:
        return float(self.projections) if self.solved else float("inf")


@dataclass
class BenchmarkReport:
    policy: str
    methods: list[str]
    records: list[RunRecord]
    stats: dict[str, dict] = field(init=False)

    def __post_init__(self):
        self.stats = summarize(self.records)

    def by_instance(self) -> dict[str, dict[str, RunRecord]]:
        table: dict[str, dict[str, RunRecord]] = {}
        for rec in self.records:
            table.setdefault(rec.instance_id, {})[rec.method] = rec
        return table


def _criteria_for(policy: dict, inst: EllipsoidInstance, eps: float, budget: int):
    if policy["criterion"] == "gap":
        return [GapToFirstSet(eps), ProjectionBudget(budget)]
    if inst.witness is None:
        raise ValueError("singleton policy needs instances with a witness")
    return [DistanceToKnownSolution(eps, inst.witness), ProjectionBudget(budget)]


def run_suite(instances: list[EllipsoidInstance], methods=DEFAULT_METHODS,
              policy: str = "interior", eps: float | None = None,
              budget: int | None = None, tol: float = DEFAULT_TOL,
              threads: int = 1) -> BenchmarkReport:
    """One MethodRun per (method, instance); failures recorded, suite continues."""
    if not instances:
        raise ValueError("need at least one instance")
    methods = [MethodKind.parse(m) if isinstance(m, str) else m for m in methods]
    if not methods:
        raise ValueError("need at least one method")
    try:
        spec = STOP_POLICIES[policy]
    except KeyError:
        raise ValueError(f"unknown stop policy {policy!r}") from None
    eps = spec["eps"] if eps is None else eps
    budget = spec["budget"] if budget is None else budget

    def solve_one(inst: EllipsoidInstance) -> list[RunRecord]:
        out = []
        X, Y = inst.sets
        for method in methods:
            criteria = _criteria_for(spec, inst, eps, budget)
            try:
                result: MethodRun = run(method, X, Y, inst.z0, criteria, tol=tol)
                out.append(RunRecord(
                    method=method.value,
                    instance_id=inst.instance_id,
                    projections=result.total_projections,
                    iterations=result.iterations,
                    stop_reason=result.stop_reason,
                    final_residual=result.final_residual,
                    wall_ms=result.wall_time * 1e3,
                ))
            except Exception as err:  # individual failures must not kill the suite
                partial = getattr(err, "partial_run", None)
                out.append(RunRecord(
                    method=method.value,
                    instance_id=inst.instance_id,
                    projections=partial.total_projections if partial else 0,
                    iterations=partial.iterations if partial else 0,
                    stop_reason=f"error:{type(err).__name__}",
                    final_residual=float("nan"),
                    wall_ms=0.0,
                ))
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(solve_one, instances))
    else:
        chunks = [solve_one(inst) for inst in instances]

    records = [rec for chunk in chunks for rec in chunk]
    return BenchmarkReport(policy=policy, methods=[m.value for m in methods], records=records)


def summarize(records: list[RunRecord]) -> dict[str, dict]:
    """Exact sample statistics of projection counts per method (std uses n-1)."""
    if not records:
        raise ValueError("no records to summarize")
    out: dict[str, dict] = {}
    for rec in records:
        out.setdefault(rec.method, []).append(rec.projections)
    stats = {}
    for method, counts in out.items():
        arr = np.asarray(counts, dtype=float)
        degenerate = arr.size < 2
        stats[method] = {
            "count": int(arr.size),
            "mean": float(np.mean(arr)),
            "std": 0.0 if degenerate else float(np.std(arr, ddof=1)),
            "median": float(np.median(arr)),
            "min": int(np.min(arr)),
            "max": int(np.max(arr)),
            "degenerate": degenerate,
            "solved": sum(1 for r in records if r.method == method and r.solved),
        }
    return stats


def performance_profile(report: BenchmarkReport, taus=None):
    """Fraction of instances solved within a factor tau of the per-instance best.

    Returns (taus, {method: fractions}).  Infinite costs never satisfy any
    finite tau; instances unsolved by every method are dropped with a warning.
    """
    table = report.by_instance()
    methods = report.methods
    ratios: dict[str, list[float]] = {m: [] for m in methods}
    dropped = 0
    for _, per_method in sorted(table.items()):
        costs = {m: per_method[m].profile_cost if m in per_method else float("inf")
                 for m in methods}
        best = min(costs.values())
        if not np.isfinite(best):
            dropped += 1
            continue
        for m in methods:
            ratios[m].append(costs[m] / best)
    if dropped:
        warnings.warn(f"performance profile dropped {dropped} instance(s) unsolved by every method")
    counted = len(next(iter(ratios.values()), []))
    if counted == 0:
        raise ValueError("no instance was solved by any method")

    if taus is None:
        finite = sorted({r for rs in ratios.values() for r in rs if np.isfinite(r)})
        taus = [1.0] + [t for t in finite if t > 1.0]
    else:
        taus = sorted(float(t) for t in taus)
        if any(t < 1.0 for t in taus):
            raise ValueError("profile factors must be >= 1")

    fractions = {
        m: [sum(1 for r in ratios[m] if r <= t) / counted for t in taus]
        for m in methods
    }
    return taus, fractions


# ---------------------------------------------------------------------------
# CSV output (schemas documented in docs/schemas.md); LF endings, '.' decimals


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _atomic_write(path, lines: list[str]) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
    os.replace(tmp, path)


def write_records_csv(report: BenchmarkReport, path) -> None:
    lines = ["method,instance_id,projections,iterations,stop_reason,final_residual"]
    for rec in report.records:
        lines.append(",".join([
            rec.method, rec.instance_id, str(rec.projections), str(rec.iterations),
            rec.stop_reason, _fmt(rec.final_residual),
        ]))
    _atomic_write(path, lines)


def write_timings_csv(report: BenchmarkReport, path) -> None:
    lines = ["method,instance_id,wall_ms"]
    for rec in report.records:
        lines.append(",".join([rec.method, rec.instance_id, _fmt(rec.wall_ms)]))
    _atomic_write(path, lines)


def write_stats_csv(report: BenchmarkReport, path) -> None:
    lines = ["method,count,mean,std,median,min,max,solved"]
    for method in report.methods:
        s = report.stats[method]
        lines.append(",".join([
            method, str(s["count"]), _fmt(s["mean"]), _fmt(s["std"]),
            _fmt(s["median"]), str(s["min"]), str(s["max"]), str(s["solved"]),
        ]))
    _atomic_write(path, lines)


def write_profile_csv(report: BenchmarkReport, path, taus=None) -> None:
    taus, fractions = performance_profile(report, taus)
    lines = ["tau," + ",".join(report.methods)]
    for i, tau in enumerate(taus):
        row = [_fmt(float(tau))] + [_fmt(fractions[m][i]) for m in report.methods]
        lines.append(",".join(row))
    _atomic_write(path, lines)
