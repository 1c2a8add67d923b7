"""Exact circular-arc oracle: closed forms, MC cross-checks, edge cases."""

import math

import numpy as np
import pytest

import ballpoly.exact2d as e2
from ballpoly.errors import DegenerateTangency
from ballpoly.geometry import BallPolyhedron
from ballpoly.intrinsic import mc_volume
from ballpoly.rng import stream

LENS_AREA = 2 * math.pi / 3 - math.sqrt(3) / 2  # two unit disks, centers 1 apart
LENS_PERIM = 4 * math.pi / 3


def lens_area_closed_form(d, R):
    return 2 * R * R * math.acos(d / (2 * R)) - (d / 2) * math.sqrt(4 * R * R - d * d)


class TestClosedForms:
    def test_single_disk(self):
        P = BallPolyhedron.from_arrays([[0.0, 0.0]], 1.0)
        area, perim = e2.exact_disk_intersection_2d(P)
        assert area == pytest.approx(math.pi, abs=1e-14)
        assert perim == pytest.approx(2 * math.pi, abs=1e-14)

    def test_lens(self):
        P = BallPolyhedron.from_arrays([[0.5, 0.0], [-0.5, 0.0]], 1.0)
        area, perim = e2.exact_disk_intersection_2d(P)
        assert area == pytest.approx(LENS_AREA, abs=1e-12)
        assert perim == pytest.approx(LENS_PERIM, abs=1e-12)

    def test_lens_general_parameters(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            R = rng.uniform(0.5, 3.0)
            d = rng.uniform(0.05, 1.9) * R
            P = BallPolyhedron.from_arrays([[d / 2, 0.0], [-d / 2, 0.0]], R)
            area, _ = e2.exact_disk_intersection_2d(P)
            assert area == pytest.approx(lens_area_closed_form(d, R), rel=1e-12)

    def test_disjoint(self):
        P = BallPolyhedron.from_arrays([[1.5, 0.0], [-1.5, 0.0]], 1.0)
        assert e2.exact_disk_intersection_2d(P) == (0.0, 0.0)

    def test_nested_disks(self):
        P = BallPolyhedron.from_arrays([[0.0, 0.0], [0.1, 0.0]], [0.5, 5.0])
        area, perim = e2.exact_disk_intersection_2d(P)
        assert area == pytest.approx(math.pi * 0.25, abs=1e-14)
        assert perim == pytest.approx(math.pi, abs=1e-14)

    def test_empty_three_disks_pairwise_meeting(self):
        # Pairwise intersecting but commonly empty.
        c = 1.1
        P = BallPolyhedron.from_arrays(
            [[c, 0.0], [-c / 2, c * math.sqrt(3) / 2], [-c / 2, -c * math.sqrt(3) / 2]], 1.0
        )
        assert not P.certainly_empty()
        assert e2.exact_disk_intersection_2d(P) == (0.0, 0.0)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(3)
        C = rng.normal(0, 0.4, (4, 2))
        R = rng.uniform(0.8, 1.5, 4)
        a0, p0 = e2.exact_disk_intersection_2d(BallPolyhedron.from_arrays(C, R))
        t = 0.83
        Q = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
        a1, p1 = e2.exact_disk_intersection_2d(BallPolyhedron.from_arrays(C @ Q.T, R))
        assert a1 == pytest.approx(a0, rel=1e-12)
        assert p1 == pytest.approx(p0, rel=1e-12)


class TestTangency:
    def test_tangent_raises_in_decomposition(self):
        with pytest.raises(DegenerateTangency):
            e2.disk_region(np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([1.0, 1.0]))

    def test_wrapper_perturbs_and_recovers(self):
        P = BallPolyhedron.from_arrays([[0.0, 0.0], [2.0, 0.0]], 1.0)
        area, perim = e2.exact_disk_intersection_2d(P)
        # Externally tangent disks share one point.
        assert area == pytest.approx(0.0, abs=1e-8)


class TestPathEquivalence:
    def test_scalar_matches_vectorized(self):
        rng = np.random.default_rng(7)
        for _ in range(400):
            k = int(rng.integers(2, 8))
            C = rng.normal(0, 0.5, (k, 2))
            R = rng.uniform(0.5, 2.0, k)
            small = e2.disk_region(C, R)
            try:
                e2.SMALL_N = 0
                vect = e2.disk_region(C, R)
            finally:
                e2.SMALL_N = 8
            assert small.empty == vect.empty
            assert small.area == pytest.approx(vect.area, abs=1e-12)
            assert small.perimeter == pytest.approx(vect.perimeter, abs=1e-12)


class TestMonteCarloCrossCheck:
    def test_random_configurations(self):
        rng = np.random.default_rng(4)
        for i in range(15):
            k = int(rng.integers(2, 7))
            C = rng.normal(0, 0.4, (k, 2))
            R = rng.uniform(0.7, 1.6, k)
            P = BallPolyhedron.from_arrays(C, R)
            area, _ = e2.exact_disk_intersection_2d(P)
            est, se = mc_volume(P, 100_000, seed=100 + i)
            assert abs(est - area) <= 4 * se + 1e-12


class TestSupportAndDistance:
    def test_support_matches_ball(self):
        reg = e2.disk_region(np.array([[1.0, 0.0]]), np.array([2.0]))
        dirs = np.array([[0.0, 1.0], [1.0, 0.0], [-1.0, 0.0]])
        assert np.allclose(e2.support_from_region(reg, dirs), [2.0, 3.0, 1.0])

    def test_support_lens_vertical(self):
        reg = e2.disk_region(np.array([[0.5, 0.0], [-0.5, 0.0]]), np.array([1.0, 1.0]))
        h = e2.support_from_region(reg, np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert h[0] == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
        assert h[1] == pytest.approx(0.5, abs=1e-12)

    def test_support_dominates_samples(self):
        rng = np.random.default_rng(9)
        C = rng.normal(0, 0.4, (4, 2))
        R = rng.uniform(0.8, 1.5, 4)
        reg = e2.disk_region(C, R)
        if reg.empty:
            pytest.skip("empty draw")
        P = BallPolyhedron.from_arrays(C, R)
        pts = P.smallest.center + P.smallest.radius * stream(1).uniform(-1, 1, (4000, 2))
        pts = pts[P.contains(pts)]
        dirs = stream(2).normal(size=(40, 2))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        h = e2.support_from_region(reg, dirs)
        inner = pts @ dirs.T
        assert np.all(inner.max(axis=0) <= h + 1e-9)

    def test_distance_zero_inside_positive_outside(self):
        reg = e2.disk_region(np.array([[0.5, 0.0], [-0.5, 0.0]]), np.array([1.0, 1.0]))
        d = e2.distance_from_region(reg, np.array([[0.0, 0.0], [0.0, 2.0], [3.0, 0.0]]))
        assert d[0] == 0.0
        # Highest lens point is (0, sqrt(3)/2).
        assert d[1] == pytest.approx(2.0 - math.sqrt(3) / 2, abs=1e-12)

    def test_distance_matches_dykstra(self):
        from ballpoly.geometry import distances_to_ballpoly

        rng = np.random.default_rng(10)
        C = rng.normal(0, 0.4, (3, 2))
        R = rng.uniform(0.9, 1.5, 3)
        reg = e2.disk_region(C, R)
        if reg.empty:
            pytest.skip("empty draw")
        P = BallPolyhedron.from_arrays(C, R)
        pts = rng.normal(0, 1.5, (200, 2))
        d_arc = e2.distance_from_region(reg, pts)
        d_dyk, ok = distances_to_ballpoly(P, pts, tol=1e-11, max_iter=20_000)
        assert np.all(ok)
        assert np.max(np.abs(d_arc - d_dyk)) < 1e-6

    def test_eccentric_small_disk_support(self):
        # Region equals the small off-center disk; support must follow it.
        reg = e2.disk_region(np.array([[3.0, 0.0], [3.1, 0.0]]), np.array([0.4, 4.0]))
        assert reg.area == pytest.approx(math.pi * 0.16, abs=1e-12)
        h = e2.support_from_region(reg, np.array([[1.0, 0.0], [-1.0, 0.0]]))
        assert h[0] == pytest.approx(3.4)
        assert h[1] == pytest.approx(-2.6)
