"""Projection, support, reflection, and body-representation tests."""

import numpy as np
import pytest

from ballpoly.errors import EmptyIntersection, NonConvergence, ZeroVector
from ballpoly.geometry import (
    Ball,
    BallPolyhedron,
    DirectionGrid,
    StarBody,
    SupportBody,
    distance_to_ballpoly,
    hausdorff_distance,
    minkowski_symmetral,
    project_onto_ballpoly,
    radial_function,
    reflect,
    star_contains,
    support_function,
)

SQRT3 = np.sqrt(3.0)


def lens():
    return BallPolyhedron.from_arrays([[0.5, 0.0], [-0.5, 0.0]], 1.0)


def touching_pair():
    # Intersection is exactly the single point (0, 0): zero
    # transversality, the worst case for alternating projections.
    return BallPolyhedron.from_arrays([[1.0, 0.0], [-1.0, 0.0]], 1.0)


class TestProjection:
    def test_single_ball_outside(self):
        P = BallPolyhedron.from_arrays([[2.0, 0.0]], 1.0)
        assert np.allclose(project_onto_ballpoly(P, np.array([0.0, 0.0])), [1.0, 0.0], atol=1e-9)

    def test_interior_point_fixed(self):
        P = BallPolyhedron.from_arrays([[0.0, 0.0]], 2.0)
        x = np.array([1.0, 0.0])
        assert np.allclose(project_onto_ballpoly(P, x), x)

    def test_touching_pair_limit(self):
        # Single-point intersection: zero transversality makes the rate
        # sublinear, so the convergence flag stays off at tight
        # tolerance while the iterate itself approaches the limit (0,0).
        from ballpoly.geometry import project_points_onto_ballpoly

        P = touching_pair()
        x = np.array([[0.0, 5.0]])
        errs = []
        for budget in (2_000, 20_000, 120_000):
            proj, _ = project_points_onto_ballpoly(P, x, tol=1e-9, max_iter=budget)
            errs.append(np.linalg.norm(proj[0]))
        assert errs[2] < errs[1] < errs[0]
        assert errs[2] < 0.03

    def test_nonconvergence_on_empty(self):
        P = BallPolyhedron.from_arrays([[2.0, 0.0], [-2.0, 0.0]], 1.0)
        with pytest.raises(NonConvergence):
            project_onto_ballpoly(P, np.array([0.0, 0.0]), max_iter=500)
        assert P.certainly_empty()

    def test_nonconvergence_on_empty_without_certificate(self):
        # Pairwise overlapping but commonly empty: only the projection
        # signal detects it.
        c = 1.1
        P = BallPolyhedron.from_arrays(
            [[c, 0.0], [-c / 2, c * np.sqrt(3) / 2], [-c / 2, -c * np.sqrt(3) / 2]], 1.0
        )
        assert not P.certainly_empty()
        with pytest.raises(NonConvergence):
            project_onto_ballpoly(P, np.array([0.0, 0.0]), max_iter=5_000)

    def test_idempotence(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            k = int(rng.integers(1, 5))
            P = BallPolyhedron.from_arrays(rng.normal(0, 0.4, (k, 2)), rng.uniform(1.0, 2.0, k))
            x = rng.normal(0, 2, 2)
            try:
                p1 = project_onto_ballpoly(P, x, tol=1e-10)
            except NonConvergence:
                continue
            p2 = project_onto_ballpoly(P, p1, tol=1e-10)
            assert np.linalg.norm(p2 - p1) <= 2e-10

    def test_nonexpansive(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            k = int(rng.integers(1, 5))
            P = BallPolyhedron.from_arrays(rng.normal(0, 0.4, (k, 2)), rng.uniform(1.0, 2.0, k))
            x, y = rng.normal(0, 2, 2), rng.normal(0, 2, 2)
            try:
                px = project_onto_ballpoly(P, x, tol=1e-10)
                py = project_onto_ballpoly(P, y, tol=1e-10)
            except NonConvergence:
                continue
            assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 2e-10


class TestDistance:
    def test_single_ball(self):
        P = BallPolyhedron.from_arrays([[0.0, 0.0]], 1.0)
        assert distance_to_ballpoly(P, np.array([3.0, 0.0])) == pytest.approx(2.0, abs=1e-9)

    def test_touching_pair(self):
        # Degenerate target {(0,0)}: use the batch API, whose iterate
        # approximates the distance even when the flag is off.
        from ballpoly.geometry import distances_to_ballpoly

        d, _ = distances_to_ballpoly(touching_pair(), np.array([[0.0, 1.0]]),
                                     tol=1e-9, max_iter=120_000)
        assert d[0] == pytest.approx(1.0, abs=0.05)

    def test_inside_zero(self):
        P = lens()
        assert distance_to_ballpoly(P, np.array([0.0, 0.0])) == 0.0


class TestSupportFunction:
    def test_single_ball_formula(self):
        P = BallPolyhedron.from_arrays([[1.0, 0.0]], 2.0)
        h = support_function(P, np.array([0.0, 1.0]))
        assert h == pytest.approx(2.0, abs=1e-7)

    def test_lens_vertical_brute_force_oracle(self):
        # Independent oracle: maximize <y, e2> over a fine polar raster
        # of the lens interior.
        t = np.linspace(0, 2 * np.pi, 2001)
        r = np.linspace(0, 1, 801)
        tt, rr = np.meshgrid(t, r)
        x, y = rr * np.cos(tt), rr * np.sin(tt)
        inside = ((x - 0.5) ** 2 + y**2 <= 1.0) & ((x + 0.5) ** 2 + y**2 <= 1.0)
        brute = np.max(y[inside])
        assert brute == pytest.approx(SQRT3 / 2, abs=2e-3)
        h = support_function(lens(), np.array([0.0, 1.0]), tol=1e-9)
        assert h == pytest.approx(SQRT3 / 2, abs=1e-7)

    def test_lens_horizontal(self):
        h = support_function(lens(), np.array([1.0, 0.0]), tol=1e-9)
        assert h == pytest.approx(0.5, abs=1e-7)

    def test_empty_raises(self):
        P = BallPolyhedron.from_arrays([[2.0, 0.0], [-2.0, 0.0]], 1.0)
        with pytest.raises(EmptyIntersection):
            support_function(P, np.array([1.0, 0.0]))

    def test_subadditivity(self):
        rng = np.random.default_rng(5)
        P = BallPolyhedron.from_arrays(rng.normal(0, 0.3, (3, 2)), 1.5)
        tol = 1e-7
        for _ in range(10):
            t1 = rng.normal(size=2)
            t2 = rng.normal(size=2)
            t1 /= np.linalg.norm(t1)
            t2 /= np.linalg.norm(t2)
            s = t1 + t2
            ns = np.linalg.norm(s)
            if ns < 1e-6:
                continue
            h_sum = support_function(P, s / ns, tol=tol) * ns
            h1 = support_function(P, t1, tol=tol)
            h2 = support_function(P, t2, tol=tol)
            assert h_sum <= h1 + h2 + 4e-6

    def test_reflection_symmetry(self):
        # Symmetric centers force h(theta) = h(R_u theta).
        P = lens()
        u = np.array([1.0, 0.0])
        rng = np.random.default_rng(6)
        for _ in range(5):
            t = rng.normal(size=2)
            t /= np.linalg.norm(t)
            h1 = support_function(P, t, tol=1e-8)
            h2 = support_function(P, reflect(u, t), tol=1e-8)
            assert h1 == pytest.approx(h2, abs=1e-6)


class TestReflect:
    def test_axis(self):
        assert np.allclose(reflect(np.array([1.0, 0.0]), np.array([3.0, 1.0])), [-3.0, 1.0])

    def test_involution(self):
        rng = np.random.default_rng(3)
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        x = rng.normal(size=3)
        assert np.allclose(reflect(u, reflect(u, x)), x, atol=1e-14)

    def test_fixed_hyperplane(self):
        u = np.array([0.0, 1.0])
        x = np.array([2.5, 0.0])
        assert np.allclose(reflect(u, x), x)


class TestDirectionGrid:
    def test_weights_and_norms(self):
        g = DirectionGrid.uniform_2d(64)
        assert len(g) == 64
        assert np.allclose(np.linalg.norm(g.directions, axis=1), 1.0, atol=1e-12)
        assert np.sum(g.weights) == pytest.approx(1.0, abs=1e-12)

    def test_fibonacci_3d(self):
        g = DirectionGrid.fibonacci_3d(500)
        assert np.allclose(np.linalg.norm(g.directions, axis=1), 1.0, atol=1e-12)
        # Quadrature sanity: mean of z^2 over the sphere is 1/3.
        assert np.dot(g.weights, g.directions[:, 2] ** 2) == pytest.approx(1 / 3, abs=1e-3)

    def test_reflection_closure(self):
        g = DirectionGrid.uniform_2d(32)
        j = 5
        perm = g.reflected_indices(j)
        u = g.directions[j]
        expected = reflect(u, g.directions)
        assert np.allclose(g.directions[perm], expected, atol=1e-12)


class TestSupportBody:
    def grid(self):
        return DirectionGrid.uniform_2d(1024)

    def test_ball_support(self):
        g = self.grid()
        K = SupportBody.ball(np.array([1.0, 0.0]), 2.0, g)
        assert K.support_one(np.array([0.0, 1.0])) == pytest.approx(2.0)
        assert K.support_one(np.array([1.0, 0.0])) == pytest.approx(3.0)

    def test_symmetral_fixes_balls(self):
        g = self.grid()
        K = SupportBody.ball(np.zeros(2), 1.5, g)
        M = minkowski_symmetral(K, np.array([1.0, 0.0]))
        assert np.allclose(M.values, K.values, atol=1e-14)

    def test_symmetral_centers_segment(self):
        g = self.grid()
        K = SupportBody.segment(np.array([1.0, 0.0]), np.array([3.0, 0.0]), g)
        M = minkowski_symmetral(K, np.array([1.0, 0.0]))
        expected = SupportBody.segment(np.array([-1.0, 0.0]), np.array([1.0, 0.0]), g)
        assert hausdorff_distance(M, expected) < 1e-12

    def test_symmetral_preserves_mean_width(self):
        g = self.grid()
        K = SupportBody.cube(1.0, 2, g)
        u = np.array([1.0, 1.0]) / np.sqrt(2.0)
        M = minkowski_symmetral(K, u)
        w_k, w_m = K.mean_width(), M.mean_width()
        assert w_m == pytest.approx(w_k, abs=1e-12)
        assert w_k == pytest.approx(4.0 / np.pi, abs=1e-5)

    def test_symmetral_reflection_invariance_exact(self):
        g = self.grid()
        K = SupportBody.polytope(np.array([[0.3, 0.1], [1.0, 0.4], [-0.2, 0.8]]), g)
        u = np.array([np.cos(0.7), np.sin(0.7)])
        M = minkowski_symmetral(K, u)
        dirs = np.random.default_rng(0).normal(size=(50, 2))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        assert np.allclose(M.support(dirs), M.support(reflect(u, dirs)), atol=1e-14)

    def test_hausdorff(self):
        g = self.grid()
        B1 = SupportBody.ball(np.zeros(2), 1.0, g)
        B2 = SupportBody.ball(np.zeros(2), 2.0, g)
        assert hausdorff_distance(B1, B2) == pytest.approx(1.0)
        assert hausdorff_distance(B1, B1) == 0.0

    def test_hausdorff_square_vs_circumball(self):
        g = self.grid()
        sq = SupportBody.cube(1.0, 2, g)
        ball = SupportBody.ball(np.zeros(2), np.sqrt(2) / 2, g)
        # Largest support gap sits at the axis directions.
        assert hausdorff_distance(sq, ball) == pytest.approx(np.sqrt(2) / 2 - 0.5, abs=1e-9)


class TestStarBody:
    def test_ball_radial(self):
        g = DirectionGrid.uniform_2d(256)
        S = StarBody.ball(1.5, g)
        assert radial_function(S, np.array([0.0, 1.0])) == pytest.approx(1.5)

    def test_contains_origin(self):
        g = DirectionGrid.uniform_2d(256)
        S = StarBody.ball(0.1, g)
        assert star_contains(S, np.zeros(2))

    def test_contains_boundary(self):
        g = DirectionGrid.uniform_2d(256)
        S = StarBody.ball(1.0, g)
        assert star_contains(S, np.array([0.999, 0.0]))
        assert not star_contains(S, np.array([1.01, 0.0]))

    def test_zero_vector_direction(self):
        from ballpoly.geometry import direction_of

        with pytest.raises(ZeroVector):
            direction_of(np.zeros(2))


class TestBallPolyhedron:
    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            BallPolyhedron([Ball(np.zeros(2), 1.0), Ball(np.zeros(3), 1.0)])

    def test_radius_positive(self):
        with pytest.raises(ValueError):
            Ball(np.zeros(2), -1.0)

    def test_empty_list(self):
        with pytest.raises(ValueError):
            BallPolyhedron([])
