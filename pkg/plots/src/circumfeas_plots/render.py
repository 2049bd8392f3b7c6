"""Figure rendering from circumfeas CSV outputs.

Two batch renderers: performance profiles (step curves over a log-scaled
factor axis, one per method) and gap-decay curves (semilog gap against
cumulative projections).  Inputs must conform to the documented CSV schemas;
schema violations raise before any file is written, and input files are never
modified.  Rendering is deterministic for fixed inputs: fixed figure size,
fixed dpi, no timestamps in PNG output.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["PlotSpec", "SchemaError", "read_profile_csv", "read_trajectory_csv",
           "render_profile", "render_gap_decay"]

FIGSIZE = (6.4, 4.2)
DPI = 150

# stable per-method styling so figures are comparable across runs
METHOD_COLORS = {
    "ccrm": "tab:blue",
    "map": "tab:orange",
    "crmprod": "tab:green",
    "spm": "tab:red",
    "crm": "tab:purple",
    "pcrm": "tab:brown",
}


class SchemaError(ValueError):
    """Input CSV does not match the documented schema."""


@dataclass
class PlotSpec:
    """What to read, where to render, and how to label it."""

    profile_path: str | None = None
    trajectory_paths: dict[str, str] = field(default_factory=dict)
    out_path: str = "figure.png"
    svg: bool = False
    log_x: bool = True
    log_y: bool = True
    labels: dict[str, str] = field(default_factory=dict)

    def label(self, method: str) -> str:
        return self.labels.get(method, method.upper().replace("CCRM", "cCRM"))


def read_profile_csv(path) -> tuple[list[float], dict[str, list[float]]]:
    """Parse profile.csv: header ``tau,<method>...``, fractions in [0, 1]."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a 'tau,<methods>' header") from None
        if not header or header[0] != "tau" or len(header) < 2:
            raise SchemaError(f"{path}: header {header!r} does not match 'tau,<method>[,...]'")
        methods = header[1:]
        taus: list[float] = []
        fractions: dict[str, list[float]] = {m: [] for m in methods}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                tau = float(row[0])
                vals = [float(tok) for tok in row[1:]]
            except ValueError as err:
                raise SchemaError(f"{path}:{lineno}: non-numeric entry ({err})") from None
            if tau < 1.0:
                raise SchemaError(f"{path}:{lineno}: tau {tau} below 1")
            if any(not 0.0 <= v <= 1.0 for v in vals):
                raise SchemaError(f"{path}:{lineno}: fraction outside [0, 1]")
            taus.append(tau)
            for m, v in zip(methods, vals):
                fractions[m].append(v)
    if not taus:
        raise SchemaError(f"{path}: no data rows")
    return taus, fractions


def read_trajectory_csv(path) -> tuple[list[int], list[float], list[int]]:
    """Parse a solve trajectory: ``iteration,gap,cumulative_projections``."""
    expected = ["iteration", "gap", "cumulative_projections"]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {expected}") from None
        if header != expected:
            raise SchemaError(f"{path}: header {header!r} != {expected}")
        iters: list[int] = []
        gaps: list[float] = []
        cums: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise SchemaError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                iters.append(int(row[0]))
                gaps.append(float(row[1]))
                cums.append(int(row[2]))
            except ValueError as err:
                raise SchemaError(f"{path}:{lineno}: non-numeric entry ({err})") from None
    if not iters:
        raise SchemaError(f"{path}: no data rows")
    return iters, gaps, cums


def _save(fig, spec: PlotSpec) -> str:
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    if spec.svg or out.suffix == ".svg":
        fig.savefig(out, format="svg", metadata={"Date": None})
    else:
        fig.savefig(out, format="png", dpi=DPI)
    plt.close(fig)
    return str(out)


def render_profile(spec: PlotSpec) -> str:
    """Step plot of the fraction of problems solved within factor tau."""
    if not spec.profile_path:
        raise SchemaError("no profile CSV given")
    taus, fractions = read_profile_csv(spec.profile_path)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for method, vals in fractions.items():
        color = METHOD_COLORS.get(method)
        ax.step(taus, vals, where="post", label=spec.label(method), color=color)
    if spec.log_x:
        ax.set_xscale("log")
    ax.set_xlabel("performance factor")
    ax.set_ylabel("fraction of problems solved")
    ax.set_ylim(-0.02, 1.05)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    return _save(fig, spec)


def render_gap_decay(spec: PlotSpec) -> str:
    """Semilog gap against cumulative projections, one curve per method."""
    if not spec.trajectory_paths:
        raise SchemaError("no trajectory CSVs given")
    series = {}
    for method, path in spec.trajectory_paths.items():
        _, gaps, cums = read_trajectory_csv(path)
        series[method] = (cums, gaps)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for method, (cums, gaps) in series.items():
        color = METHOD_COLORS.get(method)
        ax.plot(cums, gaps, label=spec.label(method), color=color)
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel("cumulative projections")
    ax.set_ylabel("gap")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="upper right")
    fig.tight_layout()
    return _save(fig, spec)
