"""Closed convex sets with exact projection and reflection operators.

Every set exposes ``project`` (nearest point in the Euclidean norm) and the
derived ``reflect`` (mirror image through the projection).  All variants have
closed-form projections except the ellipsoid, which solves a one-dimensional
dual root problem to a requested tolerance.  Product and diagonal sets provide
the building blocks for product-space reformulations of two-set feasibility
problems.

Sets are immutable after construction and safe to share between workers;
projection calls are pure.  An optional :class:`ProjectionCounter` can be
passed to ``project``/``reflect`` to meter how many projections onto input
sets a solver consumes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

try:  # optional JIT for the ellipsoid dual root-finder
    from numba import njit as _njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover
    _HAS_NUMBA = False

    def _njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]

__all__ = [
    "ConvexSet",
    "Halfspace",
    "Hyperplane",
    "Box",
    "Ball",
    "AffineSubspace",
    "Ellipsoid",
    "Product",
    "Diagonal",
    "ProjectionCounter",
    "DimensionMismatch",
    "ProjectionFailure",
    "as_point",
    "project",
    "reflect",
    "gap_to_set",
    "make_product",
    "project_diagonal",
    "set_to_dict",
    "set_from_dict",
    "dumps_set",
    "loads_set",
]

DEFAULT_TOL = 1e-10
_ELLIPSOID_MAX_ITER = 200


@_njit(cache=True)
def _ellipsoid_g_gp(w, zt, bt, alpha, mu):  # pragma: no cover - exercised via project
    g = -alpha
    gp = 0.0
    for i in range(w.shape[0]):
        den = 1.0 + mu * w[i]
        x = (zt[i] - mu * bt[i]) / den
        wx = w[i] * x
        g += x * (wx + 2.0 * bt[i])
        dx = -(bt[i] + w[i] * zt[i]) / (den * den)
        gp += 2.0 * (wx + bt[i]) * dx
    return g, gp


@_njit(cache=True)
def _ellipsoid_dual_root(w, zt, bt, alpha, tol, max_iter):  # pragma: no cover
    """Safeguarded Newton-bisection for the exterior-point multiplier.

    Returns mu >= 0 on success, -1.0 when bracketing fails, -2.0 when the
    iteration cap is hit."""
    scale = 1.0 + abs(alpha)
    lo = 0.0
    hi = 1.0 / max(w[0], 1e-300)
    g_hi, _ = _ellipsoid_g_gp(w, zt, bt, alpha, hi)
    expand = 0
    while g_hi > 0.0:
        hi *= 4.0
        g_hi, _ = _ellipsoid_g_gp(w, zt, bt, alpha, hi)
        expand += 1
        if expand > 200:
            return -1.0
    mu = 0.5 * (lo + hi)
    for _ in range(max_iter):
        g, gp = _ellipsoid_g_gp(w, zt, bt, alpha, mu)
        if abs(g) <= tol * scale:
            return mu
        if g > 0.0:
            lo = mu
        else:
            hi = mu
        mu_new = 0.5 * (lo + hi)
        if gp < 0.0:
            cand = mu - g / gp
            if lo < cand < hi:
                mu_new = cand
        mu = mu_new
    return -2.0


class DimensionMismatch(ValueError):
    """Point dimension does not match the set's ambient dimension."""


class ProjectionFailure(RuntimeError):
    """An iterative projection failed to reach its tolerance."""


def as_point(z, dim: int | None = None) -> np.ndarray:
    """Validate ``z`` as a finite 1-D float vector, optionally of dimension ``dim``."""
    arr = np.asarray(z, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"point must be a nonempty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite coordinates")
    if dim is not None and arr.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {arr.size}")
    return arr


@dataclass
class ProjectionCounter:
    """Counts projections onto input sets during a run.

    Leaf sets increment the count by one per projection.  A product projection
    therefore increments by the number of its leaves.  The diagonal subspace is
    only counted when ``count_diagonal`` is set: solvers that treat it as a
    free averaging step leave it off.
    """

    count: int = 0
    count_diagonal: bool = False

    def tick(self, amount: int = 1) -> None:
        self.count += amount


class ConvexSet:
    """Base class: a closed convex subset of R^dim with an exact projector."""

    dim: int

    def project(self, z, tol: float = DEFAULT_TOL, counter: ProjectionCounter | None = None) -> np.ndarray:
        z = as_point(z, self.dim)
        if tol <= 0:
            raise ValueError("tol must be positive")
        out = self._project(z, tol, counter)
        if counter is not None and self._counts_as_projection():
            counter.tick()
        return out

    def reflect(self, z, tol: float = DEFAULT_TOL, counter: ProjectionCounter | None = None) -> np.ndarray:
        z = as_point(z, self.dim)
        return 2.0 * self.project(z, tol, counter) - z

    def gap(self, z, tol: float = DEFAULT_TOL) -> float:
        z = as_point(z, self.dim)
        return float(np.linalg.norm(self.project(z, tol) - z))

    def contains(self, z, tol: float = 1e-9) -> bool:
        z = as_point(z, self.dim)
        return self.gap(z) <= tol * (1.0 + float(np.linalg.norm(z)))

    def _project(self, z: np.ndarray, tol: float, counter: ProjectionCounter | None) -> np.ndarray:
        raise NotImplementedError

    def _counts_as_projection(self) -> bool:
        return True

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(eq=False)
class Halfspace(ConvexSet):
    """{x : <normal, x> <= offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        self.normal = as_point(self.normal)
        self.offset = float(self.offset)
        self._nn = float(self.normal @ self.normal)
        if self._nn == 0.0:
            raise ValueError("halfspace normal must be nonzero")
        self.dim = self.normal.size

    def _project(self, z, tol, counter):
        viol = float(self.normal @ z) - self.offset
        if viol <= 0.0:
            return z.copy()
        return z - (viol / self._nn) * self.normal

    def to_dict(self):
        return {"variant": "halfspace", "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(eq=False)
class Hyperplane(ConvexSet):
    """{x : <normal, x> = offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        self.normal = as_point(self.normal)
        self.offset = float(self.offset)
        self._nn = float(self.normal @ self.normal)
        if self._nn == 0.0:
            raise ValueError("hyperplane normal must be nonzero")
        self.dim = self.normal.size

    def _project(self, z, tol, counter):
        resid = float(self.normal @ z) - self.offset
        if resid == 0.0:
            return z.copy()
        return z - (resid / self._nn) * self.normal

    def to_dict(self):
        return {"variant": "hyperplane", "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(eq=False)
class Box(ConvexSet):
    """{x : lower <= x <= upper componentwise}."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = as_point(self.lower)
        self.upper = as_point(self.upper, self.lower.size)
        if np.any(self.lower > self.upper):
            raise ValueError("box needs lower <= upper componentwise")
        self.dim = self.lower.size

    def _project(self, z, tol, counter):
        return np.clip(z, self.lower, self.upper)

    def to_dict(self):
        return {"variant": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(eq=False)
class Ball(ConvexSet):
    """Euclidean ball of given center and radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        self.center = as_point(self.center)
        self.radius = float(self.radius)
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        self.dim = self.center.size

    def _project(self, z, tol, counter):
        d = z - self.center
        nrm = float(np.linalg.norm(d))
        if nrm <= self.radius:
            return z.copy()
        return self.center + (self.radius / nrm) * d

    def to_dict(self):
        return {"variant": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(eq=False)
class AffineSubspace(ConvexSet):
    """basepoint + span(basis) with an orthonormal basis (possibly empty = single point)."""

    basepoint: np.ndarray
    basis: np.ndarray  # shape (k, dim); rows orthonormal

    def __post_init__(self):
        self.basepoint = as_point(self.basepoint)
        # contiguous copy: keeps matmul results independent of input layout
        self.basis = np.ascontiguousarray(np.atleast_2d(np.asarray(self.basis, dtype=float)))
        if self.basis.size == 0:
            self.basis = np.zeros((0, self.basepoint.size))
        if self.basis.shape[1] != self.basepoint.size:
            raise DimensionMismatch("basis vectors must match basepoint dimension")
        gram = self.basis @ self.basis.T
        if gram.size and np.max(np.abs(gram - np.eye(self.basis.shape[0]))) > 1e-12:
            raise ValueError("basis vectors must be orthonormal to 1e-12")
        self.dim = self.basepoint.size

    def _project(self, z, tol, counter):
        d = z - self.basepoint
        return self.basepoint + self.basis.T @ (self.basis @ d)

    def to_dict(self):
        return {
            "variant": "affine",
            "basepoint": self.basepoint.tolist(),
            "basis": self.basis.tolist(),
        }


@dataclass(eq=False)
class Ellipsoid(ConvexSet):
    """{z : <z, A z> + 2 <z, b> <= alpha} with A symmetric positive definite.

    The projection of an exterior point solves x(mu) = (I + mu A)^{-1} (z - mu b)
    for the unique mu > 0 with g(x(mu)) = 0, by safeguarded Newton-bisection on
    a monotone scalar function.  The eigendecomposition of A is precomputed so
    each mu-evaluation costs O(n); the result satisfies
    |g(x)| <= tol * (1 + |alpha|).
    """

    A: np.ndarray
    b: np.ndarray
    alpha: float

    def __post_init__(self):
        self.A = np.ascontiguousarray(self.A, dtype=float)
        self.b = as_point(self.b)
        self.alpha = float(self.alpha)
        n = self.b.size
        if self.A.shape != (n, n):
            raise DimensionMismatch(f"A must be {n}x{n}")
        if np.max(np.abs(self.A - self.A.T)) > 1e-12 * max(1.0, float(np.max(np.abs(self.A)))):
            raise ValueError("A must be symmetric to 1e-12")
        w, V = np.linalg.eigh(self.A)
        if w[0] <= 0:
            raise ValueError("A must be positive definite")
        # center of the quadratic: minimizer of g is -A^{-1} b
        center = -V @ ((V.T @ self.b) / w)
        gmin = float(center @ (self.A @ center) + 2.0 * (center @ self.b))
        if self.alpha < gmin - 1e-10 * (1.0 + abs(self.alpha)):
            raise ValueError("ellipsoid is empty: alpha below the quadratic's minimum")
        self.dim = n
        self._eigvals = w
        self._eigvecs = V
        self._b_eig = V.T @ self.b
        self._center = center

    def g(self, z) -> float:
        z = as_point(z, self.dim)
        return float(z @ (self.A @ z) + 2.0 * (z @ self.b) - self.alpha)

    def _project(self, z, tol, counter):
        if self.g(z) <= 0.0:
            return z.copy()
        w, V = self._eigvals, self._eigvecs
        zt = V.T @ z
        bt = self._b_eig
        if _HAS_NUMBA:
            mu = _ellipsoid_dual_root(w, zt, bt, self.alpha, tol, _ELLIPSOID_MAX_ITER)
        else:
            mu = self._dual_root_numpy(zt, bt, tol)
        if mu == -1.0:
            raise ProjectionFailure("could not bracket the ellipsoid dual root")
        if mu == -2.0:
            raise ProjectionFailure(
                f"ellipsoid projection missed |g| <= {tol * (1 + abs(self.alpha)):g} "
                f"within {_ELLIPSOID_MAX_ITER} iterations"
            )
        x = (zt - mu * bt) / (1.0 + mu * w)
        return V @ x

    def _dual_root_numpy(self, zt, bt, tol) -> float:
        w = self._eigvals
        alpha = self.alpha
        scale = 1.0 + abs(alpha)

        def g_gp(mu: float) -> tuple[float, float]:
            denom = 1.0 + mu * w
            x = (zt - mu * bt) / denom
            wx = w * x
            g = float(x @ (wx + 2.0 * bt)) - alpha
            dx = -(bt + w * zt) / (denom * denom)
            gp = 2.0 * float((wx + bt) @ dx)
            return g, gp

        lo = 0.0
        hi = 1.0 / max(float(w[0]), 1e-300)
        ghi, _ = g_gp(hi)
        expand = 0
        while ghi > 0.0:
            hi *= 4.0
            ghi, _ = g_gp(hi)
            expand += 1
            if expand > 200:
                return -1.0
        mu = 0.5 * (lo + hi)
        for _ in range(_ELLIPSOID_MAX_ITER):
            gmu, gp = g_gp(mu)
            if abs(gmu) <= tol * scale:
                return mu
            if gmu > 0.0:
                lo = mu
            else:
                hi = mu
            mu_new = 0.5 * (lo + hi)
            if gp < 0.0:
                cand = mu - gmu / gp
                if lo < cand < hi:
                    mu_new = cand
            mu = mu_new
        return -2.0

    def to_dict(self):
        return {
            "variant": "ellipsoid",
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "alpha": self.alpha,
        }


@dataclass(eq=False)
class Product(ConvexSet):
    """Cartesian product: blockwise projection onto (left, right)."""

    left: ConvexSet
    right: ConvexSet

    def __post_init__(self):
        self.dim = self.left.dim + self.right.dim

    def _project(self, z, tol, counter):
        k = self.left.dim
        return np.concatenate(
            [self.left.project(z[:k], tol, counter), self.right.project(z[k:], tol, counter)]
        )

    def _counts_as_projection(self) -> bool:
        return False  # children already ticked

    def to_dict(self):
        return {"variant": "product", "left": self.left.to_dict(), "right": self.right.to_dict()}


@dataclass(eq=False)
class Diagonal(ConvexSet):
    """{(z, z) : z in R^block_dim}, living in dimension 2*block_dim."""

    block_dim: int

    def __post_init__(self):
        self.block_dim = int(self.block_dim)
        if self.block_dim < 1:
            raise ValueError("block_dim must be positive")
        self.dim = 2 * self.block_dim

    def _project(self, z, tol, counter):
        k = self.block_dim
        m = 0.5 * (z[:k] + z[k:])
        return np.concatenate([m, m])

    def _counts_as_projection(self) -> bool:
        # Averaging two blocks; metered only when the counter opts in.
        return False

    def project(self, z, tol: float = DEFAULT_TOL, counter: ProjectionCounter | None = None) -> np.ndarray:
        out = super().project(z, tol, counter)
        if counter is not None and counter.count_diagonal:
            counter.tick()
        return out

    def to_dict(self):
        return {"variant": "diagonal", "block_dim": self.block_dim}


# ---------------------------------------------------------------------------
# Free-function interface


def project(cset: ConvexSet, z, tol: float = DEFAULT_TOL, counter: ProjectionCounter | None = None) -> np.ndarray:
    return cset.project(z, tol, counter)


def reflect(cset: ConvexSet, z, tol: float = DEFAULT_TOL, counter: ProjectionCounter | None = None) -> np.ndarray:
    return cset.reflect(z, tol, counter)


def gap_to_set(cset: ConvexSet, z, tol: float = DEFAULT_TOL) -> float:
    return cset.gap(z, tol)


def make_product(x: ConvexSet, y: ConvexSet) -> Product:
    if x.dim != y.dim:
        raise DimensionMismatch(f"product factors must share a dimension, got {x.dim} and {y.dim}")
    return Product(x, y)


def project_diagonal(z) -> np.ndarray:
    z = as_point(z)
    if z.size % 2:
        raise DimensionMismatch("diagonal projection needs an even-dimensional point")
    return Diagonal(z.size // 2).project(z)


# ---------------------------------------------------------------------------
# JSON serialization (schema documented in docs/schemas.md)

_VARIANTS = {}


def set_to_dict(cset: ConvexSet) -> dict:
    return cset.to_dict()


def set_from_dict(doc: dict) -> ConvexSet:
    try:
        variant = doc["variant"]
    except (KeyError, TypeError):
        raise ValueError("set document needs a 'variant' field") from None
    try:
        builder = _VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown set variant {variant!r}") from None
    return builder(doc)


_VARIANTS.update(
    {
        "halfspace": lambda d: Halfspace(np.array(d["normal"], dtype=float), d["offset"]),
        "hyperplane": lambda d: Hyperplane(np.array(d["normal"], dtype=float), d["offset"]),
        "box": lambda d: Box(np.array(d["lower"], dtype=float), np.array(d["upper"], dtype=float)),
        "ball": lambda d: Ball(np.array(d["center"], dtype=float), d["radius"]),
        "affine": lambda d: AffineSubspace(
            np.array(d["basepoint"], dtype=float), np.array(d["basis"], dtype=float)
        ),
        "ellipsoid": lambda d: Ellipsoid(
            np.array(d["A"], dtype=float), np.array(d["b"], dtype=float), d["alpha"]
        ),
        "product": lambda d: make_product(set_from_dict(d["left"]), set_from_dict(d["right"])),
        "diagonal": lambda d: Diagonal(d["block_dim"]),
    }
)


def dumps_set(cset: ConvexSet) -> str:
    return json.dumps(set_to_dict(cset))


def loads_set(text: str) -> ConvexSet:
    return set_from_dict(json.loads(text))
