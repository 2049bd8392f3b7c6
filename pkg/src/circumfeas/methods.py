"""Iteration operators for two-set convex feasibility, plus a run driver.

Six methods are provided:

* ``MAP``      alternating projections, z -> P_Y(P_X(z))
* ``SPM``      simultaneous projections, z -> (P_X(z) + P_Y(z)) / 2
* ``CRM``      circumcenter of (z, R_X(z), R_Y(R_X(z)))
* ``PCRM``     circumcenter of (z, R_X(z), R_Y(z))
* ``CRMPROD``  CRM in the product space K = X x Y against the diagonal
* ``CCRM``     one MAP step, one averaging step, then a PCRM circumcenter

Per iteration, CCRM consumes four projections onto input sets (the projection
of the averaged point onto X coincides with the projection of the MAP point,
so it is reused); every other method consumes two.  The diagonal average in
CRMPROD is not metered as an input-set projection.

The driver stops on the first criterion that fires: gap to the first set,
distance to a known solution, or a projection budget.  Gap monitoring uses an
extra projection that is not charged to the budget.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .circumcenter import CircumcenterResult, circumcenter3
from .sets import (
    DEFAULT_TOL,
    ConvexSet,
    Diagonal,
    ProjectionCounter,
    as_point,
    make_product,
)

__all__ = [
    "MethodKind",
    "GapToFirstSet",
    "DistanceToKnownSolution",
    "ProjectionBudget",
    "MethodRun",
    "RankDeficientError",
    "step_map",
    "step_spm",
    "step_crm",
    "step_pcrm",
    "centralize",
    "step_ccrm",
    "step_crmprod",
    "projections_per_iteration",
    "run",
]

ITERATION_CAP = 1_000_000


class MethodKind(enum.Enum):
    MAP = "map"
    SPM = "spm"
    CRM = "crm"
    PCRM = "pcrm"
    CRMPROD = "crmprod"
    CCRM = "ccrm"

    @classmethod
    def parse(cls, name: str) -> "MethodKind":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown method {name!r}; expected one of "
                             f"{[m.value for m in cls]}") from None


class RankDeficientError(RuntimeError):
    """A circumcenter step hit collinear, non-coincident vertices.

    Raised by CRM-family steps; when raised from :func:`run`, ``partial_run``
    holds the trajectory up to the failing iterate.
    """

    def __init__(self, message: str, result: CircumcenterResult | None = None,
                 partial_run: "MethodRun | None" = None):
        super().__init__(message)
        self.result = result
        self.partial_run = partial_run


# ---------------------------------------------------------------------------
# Stopping criteria


@dataclass
class GapToFirstSet:
    """Fires when ||P_X(z) - z|| < eps; the monitoring projection is free.

    Product-space runs measure the gap of the lifted problem instead,
    ||P_K(zz) - zz|| with K = X x Y: the diagonal iterates of CRMPROD touch
    the boundaries of X and Y alternately, so a single-set gap would fire long
    before the pair is solved.
    """

    eps: float

    kind = "gap"

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    def residual(self, z: np.ndarray, X: ConvexSet, Y: ConvexSet, tol: float) -> float:
        return float(np.linalg.norm(X.project(z, tol) - z))

    def product_residual(self, zz: np.ndarray, X: ConvexSet, Y: ConvexSet, tol: float) -> float:
        n = X.dim
        gx = float(np.linalg.norm(X.project(zz[:n], tol) - zz[:n]))
        gy = float(np.linalg.norm(Y.project(zz[n:], tol) - zz[n:]))
        return float(np.hypot(gx, gy))


@dataclass
class DistanceToKnownSolution:
    """Fires when ||z - solution|| < eps."""

    eps: float
    solution: np.ndarray

    kind = "distance"

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        self.solution = as_point(self.solution)

    def residual(self, z: np.ndarray, X: ConvexSet, Y: ConvexSet, tol: float) -> float:
        return float(np.linalg.norm(z - self.solution))


@dataclass
class ProjectionBudget:
    """Caps the number of projections charged to the run."""

    max_projections: int

    kind = "budget"

    def __post_init__(self):
        if self.max_projections < 1:
            raise ValueError("budget must be at least 1")


StoppingCriterion = GapToFirstSet | DistanceToKnownSolution | ProjectionBudget


@dataclass
class MethodRun:
    """Full trajectory record of one solver run."""

    method: MethodKind
    iterates: list[np.ndarray]
    projections_per_iterate: list[int]
    total_projections: int
    stop_reason: str
    final_residual: float
    wall_time: float
    iterations: int = field(init=False)

    def __post_init__(self):
        self.iterations = len(self.iterates) - 1

    def summary(self) -> dict:
        return {
            "method": self.method.value,
            "iterations": self.iterations,
            "total_projections": self.total_projections,
            "stop_reason": self.stop_reason,
            "final_residual": self.final_residual,
            "wall_time": self.wall_time,
        }

    def trajectory_rows(self, X: ConvexSet, include_coords: bool = False, tol: float = DEFAULT_TOL):
        """Yield (iteration, gap, cumulative_projections[, *coords]) rows."""
        cumulative = 0
        for k, (z, cnt) in enumerate(zip(self.iterates, self.projections_per_iterate)):
            cumulative += cnt
            gap = float(np.linalg.norm(X.project(z, tol) - z))
            row = [k, gap, cumulative]
            if include_coords:
                row.extend(z.tolist())
            yield row


# ---------------------------------------------------------------------------
# Step operators


def step_map(X: ConvexSet, Y: ConvexSet, z, tol: float = DEFAULT_TOL,
             counter: ProjectionCounter | None = None) -> np.ndarray:
    return Y.project(X.project(z, tol, counter), tol, counter)


def step_spm(X: ConvexSet, Y: ConvexSet, z, tol: float = DEFAULT_TOL,
             counter: ProjectionCounter | None = None) -> np.ndarray:
    z = as_point(z, X.dim)
    return 0.5 * (X.project(z, tol, counter) + Y.project(z, tol, counter))


def step_crm(X: ConvexSet, Y: ConvexSet, z, tol: float = DEFAULT_TOL,
             counter: ProjectionCounter | None = None) -> CircumcenterResult:
    z = as_point(z, X.dim)
    rx = X.reflect(z, tol, counter)
    ryrx = Y.reflect(rx, tol, counter)
    return circumcenter3(z, rx, ryrx)


def step_pcrm(X: ConvexSet, Y: ConvexSet, z, tol: float = DEFAULT_TOL,
              counter: ProjectionCounter | None = None) -> CircumcenterResult:
    z = as_point(z, X.dim)
    rx = X.reflect(z, tol, counter)
    ry = Y.reflect(z, tol, counter)
    return circumcenter3(z, rx, ry)


def centralize(X: ConvexSet, Y: ConvexSet, z, tol: float = DEFAULT_TOL,
               counter: ProjectionCounter | None = None) -> np.ndarray:
    """MAP step followed by averaging with the projection back onto X.

    The output satisfies <P_X(c) - c, P_Y(c) - c> <= 0: it is centralized, and
    either strictly so or already in the intersection.
    """
    z_map = step_map(X, Y, z, tol, counter)
    return 0.5 * (z_map + X.project(z_map, tol, counter))


def step_ccrm(X: ConvexSet, Y: ConvexSet, z, tol: float = DEFAULT_TOL,
              counter: ProjectionCounter | None = None) -> np.ndarray:
    """Centralize, then take the parallel circumcenter; four projections total."""
    z = as_point(z, X.dim)
    px_z = X.project(z, tol, counter)
    z_map = Y.project(px_z, tol, counter)
    px_map = X.project(z_map, tol, counter)
    z_c = 0.5 * (z_map + px_map)
    # P_X(z_c) equals P_X(z_map): z_c sits on the segment between them.
    rx = 2.0 * px_map - z_c
    ry = 2.0 * Y.project(z_c, tol, counter) - z_c
    result = circumcenter3(z_c, rx, ry)
    if not result.well_defined:
        raise RankDeficientError(
            "collinear reflections at a centralized point (numerically rank deficient)",
            result=result,
        )
    return result.center


def step_crmprod(X: ConvexSet, Y: ConvexSet, zz, tol: float = DEFAULT_TOL,
                 counter: ProjectionCounter | None = None,
                 _K: ConvexSet | None = None, _D: ConvexSet | None = None) -> np.ndarray:
    """Product-space CRM step on a doubled point zz = (z1, z2)."""
    zz = as_point(zz)
    K = _K if _K is not None else make_product(X, Y)
    D = _D if _D is not None else Diagonal(X.dim)
    if zz.size != K.dim:
        raise ValueError(f"product-space point must have dimension {K.dim}")
    rk = K.reflect(zz, tol, counter)
    rdrk = D.reflect(rk, tol, counter)
    result = circumcenter3(zz, rk, rdrk)
    if not result.well_defined:
        raise RankDeficientError("product-space circumcenter is rank deficient", result=result)
    return result.center


def projections_per_iteration(method: MethodKind) -> int:
    return 4 if method is MethodKind.CCRM else 2


# ---------------------------------------------------------------------------
# Driver


def run(method: MethodKind, X: ConvexSet, Y: ConvexSet, z0,
        stop: list[StoppingCriterion], tol: float = DEFAULT_TOL) -> MethodRun:
    """Iterate ``method`` from ``z0`` until a stopping criterion fires.

    The criteria list must be nonempty and include at least one projection
    budget.  For CRMPROD the start point is lifted to (z0, z0) and the
    recorded iterates are the first blocks of the product-space sequence.
    Deterministic given its inputs.
    """
    if X.dim != Y.dim:
        raise ValueError("X and Y must share a dimension")
    z0 = as_point(z0, X.dim)
    if not stop:
        raise ValueError("need at least one stopping criterion")
    budgets = [c for c in stop if isinstance(c, ProjectionBudget)]
    if not budgets:
        raise ValueError("stopping criteria must include a projection budget")
    budget = min(c.max_projections for c in budgets)
    monitors = [c for c in stop if not isinstance(c, ProjectionBudget)]

    cost = projections_per_iteration(method)
    counter = ProjectionCounter()
    product_mode = method is MethodKind.CRMPROD
    if product_mode:
        K = make_product(X, Y)
        D = Diagonal(X.dim)
        state = np.concatenate([z0, z0])
    else:
        state = z0.copy()

    def current_point(s: np.ndarray) -> np.ndarray:
        return s[: X.dim] if product_mode else s

    iterates = [z0.copy()]
    per_counts = [0]
    stop_reason = "iteration_cap"
    final_residual = float("nan")

    t_start = time.perf_counter()
    try:
        for _ in range(ITERATION_CAP):
            point = current_point(state)
            fired = False
            for crit in monitors:
                if product_mode and isinstance(crit, GapToFirstSet):
                    res = crit.product_residual(state, X, Y, tol)
                else:
                    res = crit.residual(point, X, Y, tol)
                if res < crit.eps:
                    stop_reason, final_residual, fired = crit.kind, res, True
                    break
                final_residual = res
            if fired:
                break
            if counter.count + cost > budget:
                stop_reason = "budget"
                break

            if method is MethodKind.MAP:
                state = step_map(X, Y, state, tol, counter)
            elif method is MethodKind.SPM:
                state = step_spm(X, Y, state, tol, counter)
            elif method is MethodKind.CCRM:
                state = step_ccrm(X, Y, state, tol, counter)
            elif method is MethodKind.CRMPROD:
                state = step_crmprod(X, Y, state, tol, counter, _K=K, _D=D)
            elif method is MethodKind.CRM:
                result = step_crm(X, Y, state, tol, counter)
                if not result.well_defined:
                    raise RankDeficientError("CRM circumcenter is rank deficient", result=result)
                state = result.center
            elif method is MethodKind.PCRM:
                result = step_pcrm(X, Y, state, tol, counter)
                if not result.well_defined:
                    raise RankDeficientError("pCRM circumcenter is rank deficient", result=result)
                state = result.center
            else:  # pragma: no cover
                raise ValueError(f"unhandled method {method}")

            iterates.append(current_point(state).copy())
            per_counts.append(cost)
    except RankDeficientError as err:
        wall = time.perf_counter() - t_start
        err.partial_run = MethodRun(
            method, iterates, per_counts, counter.count, "rank_deficient",
            final_residual, wall,
        )
        raise

    wall = time.perf_counter() - t_start
    return MethodRun(method, iterates, per_counts, counter.count, stop_reason,
                     final_residual, wall)
