"""Seeded random problem instances.

The flagship family is a pair of ellipsoids in R^n: the first is anchored at
the origin with a sparse random shape matrix, the second is centered outside
the first with its shortest semi-axis aimed at the first along the projection
direction.  A scaling factor ``lam`` controls the geometry: 1.0 makes the two
sets tangent at a single known point, 1.1 gives the intersection a thin
nonempty interior.  Every instance records a verified witness point of the
intersection and a start point of norm at least 5 outside it.

Analytic halfspace, hyperplane and ball families back the audit suites.

All draws are keyed by (seed, index, purpose) through ``SeedSequence`` spawn
keys, so generation is reproducible and parallelizable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .sets import Ball, ConvexSet, Ellipsoid, Halfspace, Hyperplane, as_point

__all__ = [
    "GeneratorConfig",
    "EllipsoidInstance",
    "gen_ellipsoid_pair",
    "gen_suite",
    "gen_halfspace_pair",
    "gen_hyperplane_pair",
    "gen_ball_pair",
    "sample_start",
    "instance_to_dict",
    "instance_from_dict",
    "save_instance",
    "load_instance",
]

# purpose ids for per-instance random substreams
_PURPOSE_MATRIX = 0
_PURPOSE_CENTER = 1
_PURPOSE_START = 2
_PURPOSE_RESAMPLE = 3

_WITNESS_TOL = 1e-13


def _rng(seed: int, index: int, purpose: int, attempt: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index, purpose, attempt)))


@dataclass
class GeneratorConfig:
    """Knobs of the two-ellipsoid generator."""

    n: int = 100
    count: int = 30
    lam: float = 1.1
    sparsity: float | None = None  # defaults to 2/n
    gamma: float = 1.0
    seed: int = 1234

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be at least 2")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.sparsity is None:
            self.sparsity = 2.0 / self.n
        if not 0.0 < self.sparsity <= 1.0:
            raise ValueError("sparsity must lie in (0, 1]")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass
class EllipsoidInstance:
    e1: Ellipsoid
    e2: Ellipsoid
    n: int
    lam: float
    gamma: float
    seed: int
    index: int
    witness: np.ndarray
    c2: np.ndarray
    d: np.ndarray
    z0: np.ndarray
    instance_id: str = field(init=False)

    def __post_init__(self):
        self.witness = as_point(self.witness, self.n)
        self.c2 = as_point(self.c2, self.n)
        self.d = as_point(self.d, self.n)
        self.z0 = as_point(self.z0, self.n)
        self.instance_id = f"ell-n{self.n}-lam{self.lam:g}-s{self.seed}-i{self.index:03d}"

    @property
    def sets(self) -> tuple[Ellipsoid, Ellipsoid]:
        return self.e1, self.e2


def gen_ellipsoid_pair(cfg: GeneratorConfig, index: int) -> EllipsoidInstance:
    """One seeded instance: E1 anchored at the origin, E2 aimed at it."""
    n = cfg.n

    rng_m = _rng(cfg.seed, index, _PURPOSE_MATRIX)
    mask = rng_m.random((n, n)) < cfg.sparsity
    B1 = np.where(mask, rng_m.standard_normal((n, n)), 0.0)
    A1 = cfg.gamma * np.eye(n) + B1.T @ B1
    b1 = rng_m.random(n)
    alpha1 = 1.1 * float(b1 @ (A1 @ b1)) + 1.0
    e1 = Ellipsoid(A1, b1, alpha1)
    assert e1.g(np.zeros(n)) < 0.0  # the origin is interior by construction

    c2 = _draw_center_outside(e1, cfg.seed, index)
    p_touch = e1.project(c2, tol=_WITNESS_TOL)
    d = cfg.lam * (p_touch - c2)
    dn = float(np.linalg.norm(d))
    if dn <= 0:
        raise RuntimeError("degenerate draw: center projects onto itself")
    u = d / dn

    rng_m2 = _rng(cfg.seed, index, _PURPOSE_MATRIX, attempt=1)
    semiaxes = np.empty(n)
    semiaxes[0] = dn
    semiaxes[1:] = dn * (1.0 + 2.0 * rng_m2.random(n - 1))  # in (dn, 3*dn]
    Q = _orthonormal_with_first_column(u, rng_m2)
    A2 = (Q / (semiaxes**2)) @ Q.T
    A2 = 0.5 * (A2 + A2.T)
    # center form <z-c2, A2 (z-c2)> <= 1 rewritten as <z,Az> + 2<z,b> <= alpha
    b2 = -A2 @ c2
    alpha2 = 1.0 - float(c2 @ (A2 @ c2))
    e2 = Ellipsoid(A2, b2, alpha2)

    if cfg.lam == 1.0:
        witness = p_touch
    else:
        witness = _interior_witness(e1, c2, u, float(np.linalg.norm(p_touch - c2)), dn)
    member_tol = 1e-8 * (1.0 + abs(alpha1) + abs(alpha2))
    if e1.g(witness) > member_tol or e2.g(witness) > member_tol:
        raise RuntimeError(f"witness fails membership for instance {index}")

    z0 = sample_start(n, cfg.seed, index=index, exclude=(e1, e2))

    return EllipsoidInstance(
        e1=e1, e2=e2, n=n, lam=cfg.lam, gamma=cfg.gamma, seed=cfg.seed,
        index=index, witness=witness, c2=c2, d=d, z0=z0,
    )


def gen_suite(cfg: GeneratorConfig) -> list[EllipsoidInstance]:
    return [gen_ellipsoid_pair(cfg, i) for i in range(cfg.count)]


def _draw_center_outside(e1: Ellipsoid, seed: int, index: int) -> np.ndarray:
    """Center for the second ellipsoid: outside E1 with margin factor 2 on the
    boundary crossing along the ray from the origin."""
    for attempt in range(100):
        rng = _rng(seed, index, _PURPOSE_CENTER, attempt)
        v = rng.standard_normal(e1.dim)
        p = float(v @ (e1.A @ v))
        q = float(v @ e1.b)
        if p <= 0:
            continue
        t_cross = (-q + np.sqrt(q * q + p * e1.alpha)) / p
        if t_cross <= 0:
            continue
        c2 = 2.0 * t_cross * v
        if e1.g(c2) > 0:
            return c2
    raise RuntimeError("could not draw a center outside the first ellipsoid")


def _orthonormal_with_first_column(u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = u.size
    M = rng.standard_normal((n, n - 1))
    M -= np.outer(u, u @ M)
    Q2, _ = np.linalg.qr(M)
    Q2 -= np.outer(u, u @ Q2)  # second pass keeps orthogonality near machine precision
    Q2 /= np.linalg.norm(Q2, axis=0, keepdims=True)
    return np.column_stack([u, Q2])


def _interior_witness(e1: Ellipsoid, c2: np.ndarray, u: np.ndarray,
                      t_enter: float, axis_len: float) -> np.ndarray:
    """Midpoint of the overlap segment along the aiming ray c2 + t*u."""
    p = float(u @ (e1.A @ u))
    q = float(u @ (e1.A @ c2) + u @ e1.b)
    c = e1.g(c2)
    disc = q * q - p * c
    if disc <= 0 or p <= 0:
        raise RuntimeError("aiming ray misses the first ellipsoid interior")
    t_exit = (-q + np.sqrt(disc)) / p
    hi = min(axis_len, t_exit)
    if hi <= t_enter:
        raise RuntimeError("empty overlap segment along the aiming ray")
    return c2 + 0.5 * (t_enter + hi) * u


def sample_start(n: int, seed: int, index: int = 0,
                 exclude: tuple[ConvexSet, ConvexSet] | None = None) -> np.ndarray:
    """Standard-normal start point rescaled to norm >= 5, outside the
    intersection of the excluded pair when one is given."""
    if n < 1:
        raise ValueError("dimension must be positive")

    def draw(attempt: int) -> np.ndarray:
        rng = _rng(seed, index, _PURPOSE_START, attempt)
        z = rng.standard_normal(n)
        nrm = float(np.linalg.norm(z))
        if nrm == 0.0:
            z = np.ones(n)
            nrm = float(np.linalg.norm(z))
        if nrm < 5.0:
            z *= 5.0 * (1.0 + 1e-12) / nrm  # safety factor absorbs rounding
        return z

    def inside_both(z: np.ndarray) -> bool:
        if exclude is None:
            return False
        a, b = exclude
        scale = 1.0 + float(np.linalg.norm(z))
        return a.gap(z) <= 1e-12 * scale and b.gap(z) <= 1e-12 * scale

    z = draw(0)
    attempt = 0
    while inside_both(z) and attempt < 100:
        attempt += 1
        z = draw(attempt)
    while inside_both(z):  # bounded sets: pushing outward must eventually exit
        z = 2.0 * z
    return z


# ---------------------------------------------------------------------------
# Analytic audit families


def gen_halfspace_pair(angle: float, dim: int = 2, seed: int = 0) -> tuple[Halfspace, Halfspace, float]:
    """Two halfspaces through the origin with normals at the given angle.

    Returns (X, Y, omega_true) where omega_true = sin(angle) is the error
    bound constant associated with the pair's rate theory.
    """
    if not 0.0 < angle <= np.pi / 2:
        raise ValueError("angle must lie in (0, pi/2]")
    e1, e2 = _orthonormal_frame(dim, seed)
    a1 = e1
    a2 = np.cos(angle) * e1 + np.sin(angle) * e2
    return Halfspace(a1, 0.0), Halfspace(a2, 0.0), float(np.sin(angle))


def gen_hyperplane_pair(angle: float, dim: int = 2, seed: int = 0,
                        through=None) -> tuple[Hyperplane, Hyperplane, float]:
    """Two hyperplanes meeting at the given dihedral angle (lines in R^2).

    Same normal construction as the halfspace family; ``through`` moves the
    common point away from the origin.  omega_true = sin(angle).
    """
    if not 0.0 < angle <= np.pi / 2:
        raise ValueError("angle must lie in (0, pi/2]")
    e1, e2 = _orthonormal_frame(dim, seed)
    a1 = e1
    a2 = np.cos(angle) * e1 + np.sin(angle) * e2
    point = np.zeros(dim) if through is None else as_point(through, dim)
    return (
        Hyperplane(a1, float(a1 @ point)),
        Hyperplane(a2, float(a2 @ point)),
        float(np.sin(angle)),
    )


def gen_ball_pair(dim: int = 2, seed: int = 0, tangent: bool = False) -> tuple[Ball, Ball, np.ndarray]:
    """Two balls with a known witness; tangent=True touches them at one point."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, 7)))
    c1 = rng.standard_normal(dim)
    r1 = 1.0 + rng.random()
    r2 = 1.0 + rng.random()
    u = rng.standard_normal(dim)
    u /= np.linalg.norm(u)
    dist = (r1 + r2) if tangent else 0.8 * (r1 + r2)
    c2 = c1 + dist * u
    if tangent:
        witness = c1 + r1 * u
    else:
        lo = dist - r2
        hi = r1
        witness = c1 + 0.5 * (lo + hi) * u
    return Ball(c1, r1), Ball(c2, r2), witness


def _orthonormal_frame(dim: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if dim < 2:
        raise ValueError("need dimension at least 2")
    if seed == 0:
        e1 = np.zeros(dim)
        e2 = np.zeros(dim)
        e1[0] = 1.0
        e2[1] = 1.0
        return e1, e2
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, 9)))
    M = rng.standard_normal((dim, 2))
    Q, _ = np.linalg.qr(M)
    return Q[:, 0].copy(), Q[:, 1].copy()


# ---------------------------------------------------------------------------
# Serialization (schema in docs/schemas.md)


def instance_to_dict(inst: EllipsoidInstance) -> dict:
    return {
        "kind": "ellipsoid_pair",
        "n": inst.n,
        "lambda": inst.lam,
        "gamma": inst.gamma,
        "seed": inst.seed,
        "index": inst.index,
        "e1": inst.e1.to_dict(),
        "e2": inst.e2.to_dict(),
        "witness": inst.witness.tolist(),
        "c2": inst.c2.tolist(),
        "d": inst.d.tolist(),
        "z0": inst.z0.tolist(),
    }


def instance_from_dict(doc: dict) -> EllipsoidInstance:
    if doc.get("kind") != "ellipsoid_pair":
        raise ValueError("not an ellipsoid_pair instance document")
    e1d, e2d = doc["e1"], doc["e2"]
    return EllipsoidInstance(
        e1=Ellipsoid(np.array(e1d["A"]), np.array(e1d["b"]), e1d["alpha"]),
        e2=Ellipsoid(np.array(e2d["A"]), np.array(e2d["b"]), e2d["alpha"]),
        n=int(doc["n"]),
        lam=float(doc["lambda"]),
        gamma=float(doc["gamma"]),
        seed=int(doc["seed"]),
        index=int(doc["index"]),
        witness=np.array(doc["witness"]),
        c2=np.array(doc["c2"]),
        d=np.array(doc["d"]),
        z0=np.array(doc["z0"]),
    )


def save_instance(inst: EllipsoidInstance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(instance_to_dict(inst), fh)
        fh.write("\n")


def load_instance(path) -> EllipsoidInstance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))
