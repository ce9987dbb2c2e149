import math

import numpy as np
import pytest

from dpconic.conic import Status
from dpconic.dp import calibrate_gaussian, sample_noise
from dpconic.apps.ellipsoid import (
    EllipsoidInstance,
    b_range_adjacency,
    build_ellipsoid,
    contains_ellipsoid,
    ellipsoid_volume,
    privatize_ellipsoid,
    regular_polygon,
    rule_vector,
    solve_ellipsoid,
    unit_square,
    unpack_rule_vector,
)


def axis_aligned_grid_oracle(inst, grid=60):
    """Best axis-aligned ellipse (z, diag(r1, r2)) inside the polytope."""
    best = (None, -np.inf)
    span = np.linspace(-1.5, 1.5, grid)
    radii = np.linspace(0.05, 2.0, grid)
    for zx in span:
        for zy in span:
            z = np.array([zx, zy])
            for r1 in radii:
                for r2 in radii:
                    Y = np.diag([r1, r2])
                    if contains_ellipsoid(inst, z, Y, tol=1e-12):
                        det = r1 * r2
                        if det > best[1]:
                            best = ((z, Y), det)
    return best


class TestDeterministic:
    def test_unit_square_gives_unit_disk(self):
        z, Y, t, sol = solve_ellipsoid(unit_square())
        assert sol.status == Status.OPTIMAL
        assert np.abs(z).max() < 1e-5
        assert np.abs(Y - np.eye(2)).max() < 1e-5
        assert abs(t - 1.0) < 1e-5
        # grid-search oracle agrees on the attainable determinant
        (_, det_oracle) = axis_aligned_grid_oracle(unit_square(), grid=40)
        assert math.sqrt(max(det_oracle, 0.0)) <= t + 1e-2

    def test_scaling_homogeneity(self):
        sq2 = unit_square().with_b(2.0 * np.ones(4))
        _, _, t, _ = solve_ellipsoid(sq2)
        assert abs(t - 2.0) < 1e-5

    def test_slab_rejected_unbounded(self):
        slab = EllipsoidInstance([[1.0, 0.0], [-1.0, 0.0]], [1.0, 1.0])
        with pytest.raises(ValueError):
            build_ellipsoid(slab)

    def test_det_hypograph_boundary(self):
        # at optimum t^2 = det Y for the symmetric solution
        z, Y, t, _ = solve_ellipsoid(regular_polygon(5, radius=2.0))
        assert abs(t * t - np.linalg.det(Y)) < 1e-6

    def test_support_function_containment(self):
        inst = unit_square()
        assert contains_ellipsoid(inst, np.zeros(2), 0.99 * np.eye(2))
        assert not contains_ellipsoid(inst, np.zeros(2), 1.01 * np.eye(2))
        # asymmetric Y uses |Y' a|, not |Y a|
        Y = np.array([[0.5, 0.9], [0.0, 0.5]])
        ok_support = all(
            np.linalg.norm(Y.T @ inst.a[i]) <= inst.b[i] + 1e-12
            for i in range(inst.m))
        assert contains_ellipsoid(inst, np.zeros(2), Y) == ok_support


class TestRuleVector:
    def test_pack_unpack_round_trip(self):
        z = np.array([0.3, -0.8])
        Y = np.array([[1.0, 0.2], [0.1, 2.0]])
        z2, Y2 = unpack_rule_vector(rule_vector(z, Y))
        assert np.array_equal(z, z2) and np.array_equal(Y, Y2)


@pytest.fixture(scope="module")
def ell_setup():
    inst = regular_polygon(5, radius=2.0)
    noise = calibrate_gaussian(0.05, 1.0, 0.1, k=6)
    pv = privatize_ellipsoid(inst, noise, eta=0.10, seed=8)
    return inst, noise, pv


class TestPrivatized:

    def test_solves(self, ell_setup):
        _, _, pv = ell_setup
        assert pv.solution.status == Status.OPTIMAL

    def test_nominal_shrinks(self, ell_setup):
        inst, _, pv = ell_setup
        _, Y_det, _, _ = solve_ellipsoid(inst)
        assert ellipsoid_volume(pv.Y_nominal) < ellipsoid_volume(Y_det)

    def test_containment_frequency(self, ell_setup):
        inst, noise, pv = ell_setup
        inside = []
        for s in range(300):
            zr, Yr = pv.release(99, stream=s)
            inside.append(contains_ellipsoid(inst, zr, Yr))
        freq = np.mean(inside)
        assert freq >= 0.9 - 3 * math.sqrt(0.1 * 0.9 / 300)

    def test_release_increment_is_draw(self, ell_setup):
        _, noise, pv = ell_setup
        zr, Yr = pv.release(seed=41)
        d = sample_noise(noise, 41, 1)[0]
        assert np.array_equal(rule_vector(zr, Yr), pv.rule.xbar + d)

    def test_zero_noise_recovers_deterministic(self):
        inst = regular_polygon(4, radius=1.5)
        from dpconic.dp import NoiseSpec

        noise = NoiseSpec("gaussian", 6, 1e-9)
        pv = privatize_ellipsoid(inst, noise, eta=0.10, seed=1, obj_samples=8)
        z_det, Y_det, _, _ = solve_ellipsoid(inst)
        assert np.abs(pv.z_nominal - z_det).max() < 1e-3
        assert np.abs((pv.Y_nominal + pv.Y_nominal.T) / 2 - Y_det).max() < 1e-3

    def test_noise_dim_checked(self):
        with pytest.raises(ValueError):
            privatize_ellipsoid(unit_square(), calibrate_gaussian(0.1, 1.0, 0.1, k=2),
                                eta=0.1)


class TestAdjacency:
    def test_b_range(self):
        inst = regular_polygon(5, radius=2.0)
        adj = b_range_adjacency(inst, 0.025)
        rng = np.random.default_rng(2)
        d1, d2 = adj.sample_pair(rng)
        for d in (d1, d2):
            assert np.all(np.abs(d.b / inst.b - 1.0) <= 0.025 + 1e-12)
