import math

import numpy as np
import pytest

from cloudsketch.errors import DegenerateGeometryError
from cloudsketch.geometry import (RigidTransform, aabb_diagonal, fibonacci_viewpoints,
                                  normalize_unit, rotation_about_axis,
                                  rotation_geodesic_angle, sample_surface, surface_area)
from cloudsketch.procedural import make_mug


def random_rotation(rng):
    return rotation_about_axis(rng.normal(size=3), rng.uniform(0, math.pi))


class TestNormalizeUnit:
    def test_unit_cube_corners(self):
        corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], float)
        out, record = normalize_unit(corners)
        assert abs(aabb_diagonal(out) - 1.0) < 1e-9
        assert np.abs(out.mean(axis=0)).max() < 1e-9
        assert np.abs(record.invert(out) - corners).max() < 1e-9

    def test_similarity_invariance(self):
        rng = np.random.default_rng(3)
        cloud = rng.normal(size=(200, 3))
        a, _ = normalize_unit(cloud)
        b, _ = normalize_unit(cloud * 17.0 + np.array([5.0, -3.0, 11.0]))
        assert np.abs(a - b).max() < 1e-9

    def test_single_point_rejected(self):
        with pytest.raises(DegenerateGeometryError):
            normalize_unit(np.array([[1.0, 2.0, 3.0]]))
        with pytest.raises(DegenerateGeometryError):
            normalize_unit(np.tile([1.0, 2.0, 3.0], (5, 1)))

    def test_idempotent(self):
        rng = np.random.default_rng(4)
        cloud, _ = normalize_unit(rng.normal(size=(50, 3)))
        again, _ = normalize_unit(cloud)
        assert np.abs(again - cloud).max() < 1e-9


class TestFibonacciViewpoints:
    def test_102_unit_directions(self):
        vps = fibonacci_viewpoints(102)
        assert len(vps) == 102
        dirs = np.array([v.direction for v in vps])
        assert np.abs(np.linalg.norm(dirs, axis=1) - 1.0).max() < 1e-9
        assert [v.index for v in vps] == list(range(102))

    def test_single_view_is_pole(self):
        (vp,) = fibonacci_viewpoints(1)
        assert np.allclose(vp.direction, [0.0, 0.0, 1.0])

    def test_min_pairwise_separation(self):
        dirs = np.array([v.direction for v in fibonacci_viewpoints(102)])
        # brute force over all 102*101/2 pairs
        worst = -1.0
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                worst = max(worst, float(dirs[i] @ dirs[j]))
        assert math.degrees(math.acos(worst)) > 10.0

    @pytest.mark.parametrize("n", [50, 102, 500])
    def test_near_uniform_coverage(self, n):
        dirs = np.array([v.direction for v in fibonacci_viewpoints(n)])
        assert np.linalg.norm(dirs.mean(axis=0)) < 0.05

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            fibonacci_viewpoints(0)

    def test_deterministic(self):
        a = np.array([v.direction for v in fibonacci_viewpoints(37)])
        b = np.array([v.direction for v in fibonacci_viewpoints(37)])
        assert np.array_equal(a, b)


class TestRigidTransform:
    def test_identity(self):
        pts = np.random.default_rng(0).normal(size=(10, 3))
        assert np.array_equal(RigidTransform.identity().apply(pts), pts)

    def test_z_rotation_quarter_turn(self):
        t = RigidTransform(rotation_about_axis([0, 0, 1], math.pi / 2), np.zeros(3))
        out = t.apply(np.array([[1.0, 0.0, 0.0]]))
        assert np.abs(out - [0.0, 1.0, 0.0]).max() < 1e-12

    def test_compose_matches_sequential_application(self):
        rng = np.random.default_rng(7)
        t1 = RigidTransform(random_rotation(rng), rng.normal(size=3))
        t2 = RigidTransform(random_rotation(rng), rng.normal(size=3))
        pts = rng.normal(size=(100, 3))
        assert np.abs(t2.compose(t1).apply(pts) - t2.apply(t1.apply(pts))).max() < 1e-9

    def test_rigidity_preserves_pairwise_distances(self):
        rng = np.random.default_rng(8)
        t = RigidTransform(random_rotation(rng), rng.normal(size=3))
        pts = rng.normal(size=(40, 3))
        out = t.apply(pts)
        d_in = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        d_out = np.linalg.norm(out[:, None] - out[None, :], axis=2)
        assert np.abs(d_in - d_out).max() < 1e-9

    def test_inverse(self):
        rng = np.random.default_rng(9)
        t = RigidTransform(random_rotation(rng), rng.normal(size=3))
        pts = rng.normal(size=(20, 3))
        assert np.abs(t.inverse().apply(t.apply(pts)) - pts).max() < 1e-9

    def test_geodesic_angle(self):
        r = rotation_about_axis([0, 1, 0], 0.3)
        assert rotation_geodesic_angle(np.eye(3), r) == pytest.approx(0.3, abs=1e-12)


class TestSurfaceSampling:
    def test_samples_deterministic_and_on_surface(self):
        mesh = make_mug(0.5)
        a = sample_surface(mesh, 200, seed=5)
        b = sample_surface(mesh, 200, seed=5)
        assert np.array_equal(a, b)
        lo = mesh.vertices.min(axis=0) - 1e-9
        hi = mesh.vertices.max(axis=0) + 1e-9
        assert ((a >= lo) & (a <= hi)).all()

    def test_area_positive(self):
        assert surface_area(make_mug(0.5)) > 0.0
