import numpy as np
import pytest

from circumfeas.circumcenter import (
    CircumcenterResult,
    Degeneracy,
    circumcenter3,
    circumcenter_residual,
)


def test_symmetric_right_triangle():
    res = circumcenter3([0.0, 0.0], [2.0, 0.0], [0.0, 2.0])
    assert np.allclose(res.center, [1.0, 1.0], atol=1e-14)
    assert res.degeneracy is Degeneracy.GENERIC
    d = [np.linalg.norm(res.center - v) for v in ([0, 0], [2, 0], [0, 2])]
    assert max(d) - min(d) < 1e-14


def test_hand_example_is_exact():
    res = circumcenter3([0.0, 0.0], [2.0, 0.0], [1.0, 3.0])
    assert np.allclose(res.center, [1.0, 4.0 / 3.0], atol=1e-12)
    # all squared distances equal 1 + 16/9 = 25/9
    for v in ([0.0, 0.0], [2.0, 0.0], [1.0, 3.0]):
        assert np.linalg.norm(res.center - np.asarray(v)) ** 2 == pytest.approx(25.0 / 9.0, abs=1e-12)
    assert res.residual <= 1e-12


def test_coincident_first_pair_gives_midpoint():
    z = np.array([1.0, 2.0])
    w = np.array([3.0, -2.0])
    res = circumcenter3(z, z, w)
    assert res.degeneracy is Degeneracy.ONE_COINCIDENT
    assert np.allclose(res.center, 0.5 * (z + w))
    res2 = circumcenter3(z, w, z)
    assert res2.degeneracy is Degeneracy.ONE_COINCIDENT
    assert np.allclose(res2.center, 0.5 * (z + w))
    res3 = circumcenter3(z, w, w)
    assert res3.degeneracy is Degeneracy.ONE_COINCIDENT
    assert np.allclose(res3.center, 0.5 * (z + w))


def test_all_coincident_returns_the_point():
    z = np.array([0.3, -0.7, 2.0])
    res = circumcenter3(z, z, z)
    assert res.degeneracy is Degeneracy.ALL_COINCIDENT
    assert np.array_equal(res.center, z)
    assert res.residual == 0.0


def test_collinear_distinct_flags_rank_deficient():
    res = circumcenter3([0.0, 0.0], [1.0, 0.0], [2.0, 0.0])
    assert res.degeneracy is Degeneracy.RANK_DEFICIENT
    assert not res.well_defined
    assert np.all(np.isfinite(res.center))  # minimum-norm solution still returned


def test_residual_function():
    tri = ([0.0, 0.0], [2.0, 0.0], [0.0, 2.0])
    assert circumcenter_residual([1.0, 1.0], *tri) <= 1e-15
    assert circumcenter_residual([0.0, 0.0], *tri) == 2.0
    res = circumcenter3([0.0, 0.0], [2.0, 0.0], [1.0, 3.0])
    assert circumcenter_residual(res.center, [0, 0], [2, 0], [1, 3]) <= 1e-12


def random_triple(rng, dim):
    while True:
        z, v, w = (3.0 * rng.standard_normal(dim) for _ in range(3))
        u, vp = v - z, w - z
        gram_det = (u @ u) * (vp @ vp) - (u @ vp) ** 2
        if gram_det > 1e-6 * (u @ u) * (vp @ vp):
            return z, v, w


def test_equidistance_and_span_on_random_triples():
    rng = np.random.default_rng(42)
    for _ in range(300):
        dim = int(rng.integers(2, 7))
        z, v, w = random_triple(rng, dim)
        res = circumcenter3(z, v, w)
        assert res.degeneracy is Degeneracy.GENERIC
        scale = 1.0 + max(
            np.linalg.norm(z - v), np.linalg.norm(z - w), np.linalg.norm(v - w)
        )
        assert res.residual <= 1e-9 * scale
        # affine-span membership: the out-of-plane component vanishes
        basis = np.linalg.qr(np.stack([v - z, w - z], axis=1))[0]
        delta = res.center - z
        off_plane = delta - basis @ (basis.T @ delta)
        assert np.linalg.norm(off_plane) <= 1e-9 * scale


def test_rigid_motion_equivariance():
    rng = np.random.default_rng(43)
    for _ in range(50):
        dim = int(rng.integers(2, 6))
        z, v, w = random_triple(rng, dim)
        Q = np.linalg.qr(rng.standard_normal((dim, dim)))[0]
        t = rng.standard_normal(dim)
        direct = circumcenter3(Q @ z + t, Q @ v + t, Q @ w + t).center
        mapped = Q @ circumcenter3(z, v, w).center + t
        scale = 1.0 + np.linalg.norm(mapped)
        assert np.linalg.norm(direct - mapped) <= 1e-9 * scale


def test_permutation_invariance():
    rng = np.random.default_rng(44)
    for _ in range(50):
        z, v, w = random_triple(rng, 3)
        base = circumcenter3(z, v, w).center
        for tri in ((z, w, v), (v, z, w), (v, w, z), (w, z, v), (w, v, z)):
            other = circumcenter3(*tri).center
            assert np.linalg.norm(base - other) <= 1e-10 * (1.0 + np.linalg.norm(base))


def test_dimension_mismatch():
    with pytest.raises(Exception):
        circumcenter3([0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0])


def test_result_dataclass_fields():
    res = circumcenter3([0.0, 0.0], [2.0, 0.0], [0.0, 2.0])
    assert isinstance(res, CircumcenterResult)
    assert res.well_defined
