"""Circumcenter of three points in Euclidean space.

The circumcenter is the unique point of the affine span of a triangle that is
equidistant from its three vertices.  Writing u = v - z and v' = w - z, it is
z + a*u + b*v' where (a, b) solves the 2x2 Gram system

    [<u,u>   <u,v'>] [a]   [<u,u>/2 ]
    [<u,v'>  <v',v'>] [b] = [<v',v'>/2].

Coincident vertices degenerate gracefully (midpoints); collinear distinct
vertices make the system singular, in which case the minimum-norm least
squares solution is returned and flagged so callers can abort.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .sets import as_point

__all__ = ["Degeneracy", "CircumcenterResult", "circumcenter3", "circumcenter_residual"]

# Relative Gram-determinant threshold below which the triangle is treated as
# collinear; relative to <u,u><v',v'> so the test is scale invariant.
RANK_TOL = 1e-14


class Degeneracy(enum.Enum):
    GENERIC = "generic"
    ONE_COINCIDENT = "one_coincident"
    ALL_COINCIDENT = "all_coincident"
    RANK_DEFICIENT = "rank_deficient"


@dataclass
class CircumcenterResult:
    center: np.ndarray
    degeneracy: Degeneracy
    residual: float

    @property
    def well_defined(self) -> bool:
        return self.degeneracy is not Degeneracy.RANK_DEFICIENT


def circumcenter_residual(c, z, v, w) -> float:
    """Maximum pairwise disagreement of the distances from c to z, v, w."""
    c = as_point(c)
    dz = float(np.linalg.norm(c - as_point(z, c.size)))
    dv = float(np.linalg.norm(c - as_point(v, c.size)))
    dw = float(np.linalg.norm(c - as_point(w, c.size)))
    return max(abs(dz - dv), abs(dz - dw), abs(dv - dw))


def circumcenter3(z, v, w) -> CircumcenterResult:
    """Circumcenter of the triangle (z, v, w), with degeneracy reporting."""
    z = as_point(z)
    v = as_point(v, z.size)
    w = as_point(w, z.size)

    u = v - z
    vp = w - z
    uu = float(u @ u)
    vv = float(vp @ vp)

    if uu == 0.0 and vv == 0.0:
        return CircumcenterResult(z.copy(), Degeneracy.ALL_COINCIDENT, 0.0)
    if uu == 0.0:  # v coincides with z
        c = 0.5 * (z + w)
        return CircumcenterResult(c, Degeneracy.ONE_COINCIDENT, circumcenter_residual(c, z, v, w))
    if vv == 0.0:  # w coincides with z
        c = 0.5 * (z + v)
        return CircumcenterResult(c, Degeneracy.ONE_COINCIDENT, circumcenter_residual(c, z, v, w))
    if np.array_equal(v, w):
        c = 0.5 * (z + v)
        return CircumcenterResult(c, Degeneracy.ONE_COINCIDENT, circumcenter_residual(c, z, v, w))

    uv = float(u @ vp)
    det = uu * vv - uv * uv
    rhs = np.array([0.5 * uu, 0.5 * vv])
    gram = np.array([[uu, uv], [uv, vv]])

    if det <= RANK_TOL * uu * vv:
        coeffs, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
        c = z + coeffs[0] * u + coeffs[1] * vp
        return CircumcenterResult(c, Degeneracy.RANK_DEFICIENT, circumcenter_residual(c, z, v, w))

    a = (rhs[0] * vv - rhs[1] * uv) / det
    b = (rhs[1] * uu - rhs[0] * uv) / det
    c = z + a * u + b * vp
    return CircumcenterResult(c, Degeneracy.GENERIC, circumcenter_residual(c, z, v, w))
