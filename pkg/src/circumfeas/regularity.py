"""Runtime audits: centralization checks, support-halfspace oracles,
error-bound estimation, and linear-rate measurement.

The centralization test and the projection onto the intersection of the two
support halfspaces give an independent route to the parallel circumcenter at
centralized points, so solver steps can be cross-checked at runtime.  The
error-bound estimator brute-forces the local regularity constant

    omega = min over samples of  max(dist(z, X), dist(z, Y)) / dist(z, X & Y)

over a ball around a feasible anchor, and ``rate_bounds`` turns an omega into
the per-iteration contraction bounds (beta^2, (1+beta)/2, beta^2 (1+beta)/2)
for MAP, SPM and the centralized circumcenter method, where
beta = sqrt(1 - omega^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sets import ConvexSet, Halfspace, Hyperplane, as_point

__all__ = [
    "CentralizationCheck",
    "SupportHalfspacePair",
    "ErrorBoundEstimate",
    "RateEstimate",
    "check_centralized",
    "support_halfspaces",
    "project_halfspace_intersection",
    "intersection_distance_oracle",
    "estimate_error_bound",
    "estimate_rates",
    "rate_bounds",
]


@dataclass
class CentralizationCheck:
    """Sign test for <P_X(z) - z, P_Y(z) - z> plus membership flags."""

    inner_product: float
    centralized: bool
    strictly: bool
    gap_x: float
    gap_y: float

    @property
    def reflection_inner_product(self) -> float:
        return 4.0 * self.inner_product


def check_centralized(X: ConvexSet, Y: ConvexSet, z, tol: float = 1e-10) -> CentralizationCheck:
    z = as_point(z, X.dim)
    px = X.project(z)
    py = Y.project(z)
    dx = px - z
    dy = py - z
    gx = float(np.linalg.norm(dx))
    gy = float(np.linalg.norm(dy))
    ip = float(dx @ dy)
    scale = 1.0 + gx * gy
    member_tol = tol * (1.0 + float(np.linalg.norm(z)))
    return CentralizationCheck(
        inner_product=ip,
        centralized=ip <= tol * scale,
        strictly=(gx > member_tol and gy > member_tol),
        gap_x=gx,
        gap_y=gy,
    )


@dataclass
class SupportHalfspacePair:
    """Support halfspaces of X and Y at the projections of a probe point z.

    A side is None when z belongs to the corresponding set, in which case the
    halfspace degenerates to the whole space.
    """

    z: np.ndarray
    proj_x: np.ndarray
    proj_y: np.ndarray
    s_x: Halfspace | None
    s_y: Halfspace | None
    h_x: Hyperplane | None
    h_y: Hyperplane | None

    @property
    def degenerate_x(self) -> bool:
        return self.s_x is None

    @property
    def degenerate_y(self) -> bool:
        return self.s_y is None


def support_halfspaces(X: ConvexSet, Y: ConvexSet, z, tol: float = 1e-12) -> SupportHalfspacePair:
    z = as_point(z, X.dim)
    px = X.project(z)
    py = Y.project(z)

    def side(p: np.ndarray):
        normal = z - p
        if float(np.linalg.norm(normal)) <= tol * (1.0 + float(np.linalg.norm(z))):
            return None, None
        offset = float(normal @ p)
        return Halfspace(normal, offset), Hyperplane(normal, offset)

    s_x, h_x = side(px)
    s_y, h_y = side(py)
    return SupportHalfspacePair(z, px, py, s_x, s_y, h_x, h_y)


def project_halfspace_intersection(pair: SupportHalfspacePair, z=None) -> np.ndarray:
    """Exact projection of z onto the intersection of the two support halfspaces.

    Enumerates the KKT activity patterns: the projection onto one boundary
    hyperplane when it is feasible for the other side, otherwise the
    two-multiplier solve on both boundaries.  Serves as an independent oracle
    for the parallel circumcenter at centralized points.
    """
    z = pair.z if z is None else as_point(z, pair.z.size)
    if pair.degenerate_x and pair.degenerate_y:
        return z.copy()
    if pair.degenerate_x:
        return pair.s_y.project(z)
    if pair.degenerate_y:
        return pair.s_x.project(z)

    nx = pair.s_x.normal
    ny = pair.s_y.normal
    bx = pair.s_x.offset
    by = pair.s_y.offset
    feas_tol = 1e-12 * (1.0 + abs(bx) + abs(by) + float(np.linalg.norm(z)) ** 2)

    # Projection onto one boundary hyperplane wins whenever it satisfies the
    # other side; at the probe point itself it equals the set projection.
    cand_x = pair.h_x.project(z)
    if float(ny @ cand_x) - by <= feas_tol:
        return cand_x
    cand_y = pair.h_y.project(z)
    if float(nx @ cand_y) - bx <= feas_tol:
        return cand_y

    gram = np.array([[float(nx @ nx), float(nx @ ny)], [float(nx @ ny), float(ny @ ny)]])
    rhs = np.array([float(nx @ z) - bx, float(ny @ z) - by])
    det = gram[0, 0] * gram[1, 1] - gram[0, 1] * gram[0, 1]
    if det <= 1e-16 * gram[0, 0] * gram[1, 1]:
        raise ValueError("support halfspaces are (numerically) parallel and inconsistent")
    lam = np.linalg.solve(gram, rhs)
    return z - lam[0] * nx - lam[1] * ny


# ---------------------------------------------------------------------------
# Distance-to-intersection oracles


def _project_wedge_exact(hs1: Halfspace, hs2: Halfspace, Z: np.ndarray) -> np.ndarray:
    """Vectorized exact projection of rows of Z onto the intersection of two
    halfspaces with non-parallel normals."""
    a1, b1 = hs1.normal, hs1.offset
    a2, b2 = hs2.normal, hs2.offset
    n11 = float(a1 @ a1)
    n22 = float(a2 @ a2)
    n12 = float(a1 @ a2)
    det = n11 * n22 - n12 * n12
    if det <= 1e-16 * n11 * n22:
        raise ValueError("halfspace normals are (numerically) parallel")

    v1 = Z @ a1 - b1
    v2 = Z @ a2 - b2
    # candidate: single constraint active
    p1 = Z - np.outer(np.maximum(v1, 0.0) / n11, a1)
    p2 = Z - np.outer(np.maximum(v2, 0.0) / n22, a2)
    # candidate: both boundaries active
    l1 = (v1 * n22 - v2 * n12) / det
    l2 = (v2 * n11 - v1 * n12) / det
    p12 = Z - np.outer(l1, a1) - np.outer(l2, a2)

    feas_tol = 1e-10 * (1.0 + abs(b1) + abs(b2))
    d1 = np.where(p1 @ a2 - b2 <= feas_tol, np.linalg.norm(Z - p1, axis=1), np.inf)
    d2 = np.where(p2 @ a1 - b1 <= feas_tol, np.linalg.norm(Z - p2, axis=1), np.inf)
    d12 = np.linalg.norm(Z - p12, axis=1)
    choice = np.argmin(np.stack([d1, d2, d12]), axis=0)
    out = np.where(choice[:, None] == 0, p1, np.where(choice[:, None] == 1, p2, p12))
    inside = (v1 <= 0.0) & (v2 <= 0.0)
    out[inside] = Z[inside]
    return out


def _project_affine_pair_exact(hp1: Hyperplane, hp2: Hyperplane, Z: np.ndarray) -> np.ndarray:
    """Vectorized exact projection of rows of Z onto the intersection of two
    non-parallel hyperplanes."""
    a1, b1 = hp1.normal, hp1.offset
    a2, b2 = hp2.normal, hp2.offset
    n11 = float(a1 @ a1)
    n22 = float(a2 @ a2)
    n12 = float(a1 @ a2)
    det = n11 * n22 - n12 * n12
    if det <= 1e-16 * n11 * n22:
        raise ValueError("hyperplane normals are (numerically) parallel")
    r1 = Z @ a1 - b1
    r2 = Z @ a2 - b2
    l1 = (r1 * n22 - r2 * n12) / det
    l2 = (r2 * n11 - r1 * n12) / det
    return Z - np.outer(l1, a1) - np.outer(l2, a2)


def intersection_distance_oracle(X: ConvexSet, Y: ConvexSet, witness=None,
                                 ap_tol: float = 1e-12, ap_cap: int = 100_000):
    """Return a callable mapping a batch of points (m, n) to distances to X & Y.

    Family specific: a known witness acts as a surrogate for singleton
    intersections; halfspace and hyperplane pairs use exact closed forms; any
    other pair falls back to alternating projections run to ``ap_tol``
    (audit-quality surrogate, never charged to any budget).
    """
    if witness is not None:
        wpt = as_point(witness, X.dim)

        def by_witness(Z: np.ndarray) -> np.ndarray:
            return np.linalg.norm(Z - wpt[None, :], axis=1)

        return by_witness

    if X is Y:
        def by_single(Z: np.ndarray) -> np.ndarray:
            return np.array([X.gap(z) for z in Z])

        return by_single

    if isinstance(X, Halfspace) and isinstance(Y, Halfspace):
        def by_wedge(Z: np.ndarray) -> np.ndarray:
            return np.linalg.norm(Z - _project_wedge_exact(X, Y, Z), axis=1)

        return by_wedge

    if isinstance(X, Hyperplane) and isinstance(Y, Hyperplane):
        def by_affine(Z: np.ndarray) -> np.ndarray:
            return np.linalg.norm(Z - _project_affine_pair_exact(X, Y, Z), axis=1)

        return by_affine

    def by_alternating(Z: np.ndarray) -> np.ndarray:
        out = np.empty(Z.shape[0])
        for i, z in enumerate(Z):
            point = z.copy()
            for _ in range(ap_cap):
                nxt = Y.project(X.project(point))
                if float(np.linalg.norm(nxt - point)) <= ap_tol:
                    point = nxt
                    break
                point = nxt
            out[i] = float(np.linalg.norm(z - point))
        return out

    return by_alternating


@dataclass
class ErrorBoundEstimate:
    omega: float
    beta: float
    sample_count: int
    neighborhood_radius: float
    no_valid_samples: bool = False


def estimate_error_bound(X: ConvexSet, Y: ConvexSet, anchor, radius: float,
                         samples: int, seed: int, witness=None) -> ErrorBoundEstimate:
    """Empirical local error-bound constant around a feasible anchor.

    Draws ``samples`` points uniformly from the ball of the given radius,
    discards those inside the intersection, and returns the minimum ratio
    max(dist(z,X), dist(z,Y)) / dist(z, X & Y).  The result underestimates the
    best local constant (surrogate intersection distances are upper bounds).
    """
    anchor = as_point(anchor, X.dim)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if samples < 1:
        raise ValueError("need at least one sample")
    scale = 1.0 + float(np.linalg.norm(anchor))
    if X.gap(anchor) > 1e-8 * scale or Y.gap(anchor) > 1e-8 * scale:
        raise ValueError("anchor must belong to both sets")

    rng = np.random.default_rng(seed)
    n = X.dim
    dirs = rng.standard_normal((samples, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = radius * rng.random(samples) ** (1.0 / n)
    Z = anchor[None, :] + dirs * radii[:, None]

    dist_int = intersection_distance_oracle(X, Y, witness=witness)(Z)

    if isinstance(X, Halfspace) and isinstance(Y, Halfspace):
        dx = np.maximum(Z @ X.normal - X.offset, 0.0) / float(np.linalg.norm(X.normal))
        dy = np.maximum(Z @ Y.normal - Y.offset, 0.0) / float(np.linalg.norm(Y.normal))
    elif isinstance(X, Hyperplane) and isinstance(Y, Hyperplane):
        dx = np.abs(Z @ X.normal - X.offset) / float(np.linalg.norm(X.normal))
        dy = np.abs(Z @ Y.normal - Y.offset) / float(np.linalg.norm(Y.normal))
    else:
        dx = np.array([X.gap(z) for z in Z])
        dy = np.array([Y.gap(z) for z in Z])

    valid = dist_int > 1e-12 * (1.0 + radius)
    if not np.any(valid):
        return ErrorBoundEstimate(float("nan"), float("nan"), 0, radius, no_valid_samples=True)
    ratios = np.maximum(dx[valid], dy[valid]) / dist_int[valid]
    omega = float(min(np.min(ratios), 1.0))
    beta = math.sqrt(max(0.0, 1.0 - omega * omega))
    return ErrorBoundEstimate(omega, beta, int(np.count_nonzero(valid)), radius)


# ---------------------------------------------------------------------------
# Rate measurement


@dataclass
class RateEstimate:
    q: float
    r: float
    tail_fraction: float


def estimate_rates(distances, tail_fraction: float = 0.5) -> RateEstimate:
    """Tail estimates of the Q and R linear-convergence constants.

    ``q`` is the largest successive ratio d_{k+1}/d_k over the final
    ``tail_fraction`` of entries; ``r`` is the largest d_k^(1/k) over the same
    tail (k counted from the start of the sequence).
    """
    d = np.asarray(list(distances), dtype=float)
    if d.size < 5:
        raise ValueError("need at least 5 distances")
    if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
        raise ValueError("distances must be strictly positive and finite")
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError("tail_fraction must lie in (0, 1)")

    start = int(math.floor(d.size * (1.0 - tail_fraction)))
    start = min(max(start, 1), d.size - 2)
    ratios = d[start + 1:] / d[start:-1]
    q = float(np.max(ratios))
    ks = np.arange(max(start, 1), d.size)
    r = float(np.max(d[ks] ** (1.0 / ks)))
    return RateEstimate(q=q, r=r, tail_fraction=tail_fraction)


def rate_bounds(omega: float) -> tuple[float, float, float]:
    """Per-iteration contraction bounds (MAP, SPM, cCRM) from an EB constant."""
    if not 0.0 < omega < 1.0:
        raise ValueError("omega must lie in (0, 1)")
    beta = math.sqrt(1.0 - omega * omega)
    return beta * beta, (1.0 + beta) / 2.0, beta * beta * (1.0 + beta) / 2.0
