import math

import numpy as np
import pytest

from cloudsketch.errors import DegenerateFitError, DegenerateGeometryError
from cloudsketch.geometry import (normalize_unit, rotation_about_axis,
                                  rotation_geodesic_angle, sample_surface)
from cloudsketch.icp import (IcpParams, apply_prescale, icp, model_alignment_points,
                             nearest_neighbor_pairs, parse_icp_result, prescale_model,
                             rigid_fit, select_control_points, serialize_icp_result)


def brute_force_nn(controls, model_pts):
    """O(n*m) linear scan; ties resolve to the lowest model index."""
    idx = []
    for c in controls:
        d2 = ((model_pts - c) ** 2).sum(axis=1)
        idx.append(int(np.argmin(d2)))
    return np.asarray(idx)


def random_rigid(rng):
    r = rotation_about_axis(rng.normal(size=3), rng.uniform(0.0, math.pi))
    return r, rng.normal(size=3)


class TestControlPoints:
    def test_exhaustion(self):
        cloud = np.random.default_rng(0).normal(size=(500, 3))
        out = select_control_points(cloud, 2000, seed=1)
        assert np.array_equal(out, cloud)

    def test_exact_count_distinct(self):
        cloud = np.random.default_rng(1).normal(size=(10000, 3))
        out = select_control_points(cloud, 2000, seed=2)
        assert out.shape == (2000, 3)
        assert len(np.unique(out, axis=0)) == 2000

    def test_deterministic(self):
        cloud = np.random.default_rng(2).normal(size=(800, 3))
        a = select_control_points(cloud, 100, seed=5)
        b = select_control_points(cloud, 100, seed=5)
        assert np.array_equal(a, b)

    def test_empty_rejected(self):
        with pytest.raises(DegenerateGeometryError):
            select_control_points(np.zeros((0, 3)), 10)


class TestNearestNeighborPairs:
    def test_identity_pairs(self):
        pts = np.random.default_rng(3).normal(size=(50, 3))
        pairs = nearest_neighbor_pairs(pts, pts)
        assert np.array_equal(pairs.model_indices, np.arange(50))
        assert pairs.distances.max() == 0.0

    def test_single_model_point(self):
        controls = np.random.default_rng(4).normal(size=(20, 3))
        pairs = nearest_neighbor_pairs(controls, np.array([[0.0, 0.0, 0.0]]))
        assert (pairs.model_indices == 0).all()
        assert np.abs(pairs.distances - np.linalg.norm(controls, axis=1)).max() < 1e-12

    def test_matches_linear_scan(self):
        rng = np.random.default_rng(5)
        controls = rng.normal(size=(200, 3))
        model = rng.normal(size=(300, 3))
        pairs = nearest_neighbor_pairs(controls, model)
        assert np.array_equal(pairs.model_indices, brute_force_nn(controls, model))

    def test_exact_tie_lowest_index(self):
        controls = np.array([[0.0, 0.0, 0.0]])
        model = np.array([[3.0, 0.0, 0.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0],
                          [0.0, 1.0, 0.0]])
        pairs = nearest_neighbor_pairs(controls, model)
        assert pairs.model_indices[0] == 1  # three candidates at distance 1

    def test_distances_consistent_with_pairs(self):
        rng = np.random.default_rng(6)
        controls = rng.normal(size=(40, 3))
        model = rng.normal(size=(60, 3))
        pairs = nearest_neighbor_pairs(controls, model)
        recomputed = np.linalg.norm(pairs.model_points - pairs.control_points, axis=1)
        assert np.abs(recomputed - pairs.distances).max() < 1e-9

    def test_empty_rejected(self):
        with pytest.raises(DegenerateGeometryError):
            nearest_neighbor_pairs(np.zeros((0, 3)), np.ones((3, 3)))


class TestRigidFit:
    def test_identity_when_equal(self):
        pts = np.random.default_rng(7).normal(size=(30, 3))
        t = rigid_fit(pts, pts)
        assert np.abs(t.rotation - np.eye(3)).max() < 1e-12
        assert np.abs(t.translation).max() < 1e-12

    def test_recovers_random_transform(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            src = rng.normal(size=(40, 3))
            r0, t0 = random_rigid(rng)
            t = rigid_fit(src, src @ r0.T + t0)
            assert np.linalg.norm(t.rotation - r0) < 1e-9
            assert np.linalg.norm(t.translation - t0) < 1e-9

    def test_beats_random_transforms_on_noisy_pairs(self):
        rng = np.random.default_rng(9)
        src = rng.normal(size=(60, 3))
        r0, t0 = random_rigid(rng)
        dst = src @ r0.T + t0 + rng.normal(scale=0.05, size=src.shape)
        fit = rigid_fit(src, dst)
        best = ((src @ fit.rotation.T + fit.translation - dst) ** 2).sum()
        for _ in range(1000):
            r, t = random_rigid(rng)
            assert ((src @ r.T + t - dst) ** 2).sum() >= best

    def test_det_plus_one_on_planar_points(self):
        rng = np.random.default_rng(10)
        src = rng.normal(size=(25, 3))
        src[:, 2] = 0.0  # planar
        r0, t0 = random_rigid(rng)
        t = rigid_fit(src, src @ r0.T + t0)
        assert abs(np.linalg.det(t.rotation) - 1.0) < 1e-9
        assert np.abs(t.rotation.T @ t.rotation - np.eye(3)).max() < 1e-9

    def test_too_few_pairs(self):
        with pytest.raises(DegenerateFitError):
            rigid_fit(np.zeros((2, 3)), np.zeros((2, 3)))

    def test_collinear_rejected(self):
        src = np.outer(np.arange(5.0), [1.0, 0.0, 0.0])
        with pytest.raises(DegenerateFitError):
            rigid_fit(src, src + 1.0)


class TestPrescale:
    def test_identical_clouds(self):
        pts = np.random.default_rng(11).normal(size=(40, 3))
        assert prescale_model(pts, pts) == 1.0

    def test_double_size_model(self):
        pts = np.random.default_rng(12).normal(size=(40, 3))
        assert abs(prescale_model(pts * 2.0, pts) - 0.5) < 1e-12

    def test_diagonals_match_after_prescale(self):
        rng = np.random.default_rng(13)
        model = rng.normal(size=(50, 3)) * 7.0
        cloud = rng.normal(size=(60, 3))
        from cloudsketch.geometry import aabb_diagonal
        s = prescale_model(model, cloud)
        assert abs(aabb_diagonal(apply_prescale(model, s)) - aabb_diagonal(cloud)) < 1e-9

    def test_degenerate_model(self):
        with pytest.raises(DegenerateGeometryError):
            prescale_model(np.zeros((5, 3)), np.random.default_rng(0).normal(size=(5, 3)))


class TestIcp:
    def test_identical_inputs_converge_immediately(self):
        cloud = np.random.default_rng(14).normal(size=(400, 3)) * 0.3
        res = icp(cloud, cloud, IcpParams(seed=0))
        assert res.error < 1e-9
        assert res.converged
        assert res.iterations <= 2

    def test_recovers_synthetic_transform(self, icp_meshes):
        mesh = icp_meshes["mug"]
        rng = np.random.default_rng(15)
        surf = sample_surface(mesh, 300, seed=21)
        r0 = rotation_about_axis(rng.normal(size=3), math.radians(20.0))
        t0 = np.array([0.1, -0.05, 0.08])
        cloud = surf @ r0.T + t0 + rng.normal(scale=0.005, size=surf.shape)
        res = icp(model_alignment_points(mesh, seed=0), cloud, IcpParams(seed=0))
        assert math.degrees(rotation_geodesic_angle(res.transform.rotation, r0)) < 2.0
        assert np.linalg.norm(res.transform.translation - t0) < 0.01
        assert res.error < 0.01
        assert res.converged

    def test_error_history_non_increasing(self, icp_meshes):
        mesh = icp_meshes["chair"]
        rng = np.random.default_rng(16)
        surf = sample_surface(mesh, 300, seed=33)
        r0 = rotation_about_axis(rng.normal(size=3), math.radians(28.0))
        cloud = surf @ r0.T + 0.15 + rng.normal(scale=0.005, size=surf.shape)
        res = icp(model_alignment_points(mesh, seed=1), cloud, IcpParams(seed=1))
        hist = np.asarray(res.error_history)
        assert (np.diff(hist) <= 1e-12).all()

    def test_transform_is_rigid(self, icp_meshes):
        mesh = icp_meshes["table"]
        surf = sample_surface(mesh, 300, seed=44)
        res = icp(model_alignment_points(mesh, seed=2), surf, IcpParams(seed=2))
        r = res.transform.rotation
        assert np.abs(r.T @ r - np.eye(3)).max() < 1e-9
        assert abs(np.linalg.det(r) - 1.0) < 1e-9
        pts = mesh.vertices[:100]
        out = res.transform.apply(pts)
        d_in = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        d_out = np.linalg.norm(out[:, None] - out[None, :], axis=2)
        assert np.abs(d_in - d_out).max() < 1e-9

    def test_deterministic(self, icp_meshes):
        mesh = icp_meshes["mug"]
        rng = np.random.default_rng(18)
        surf = sample_surface(mesh, 250, seed=55)
        cloud = surf + rng.normal(scale=0.004, size=surf.shape)
        a = icp(model_alignment_points(mesh, seed=3), cloud, IcpParams(seed=3))
        b = icp(model_alignment_points(mesh, seed=3), cloud, IcpParams(seed=3))
        assert serialize_icp_result(a) == serialize_icp_result(b)
        assert a.error_history == b.error_history

    def test_prescale_bridges_unit_gap(self, icp_meshes):
        mesh = icp_meshes["mug"]
        surf = sample_surface(mesh, 300, seed=66)
        res = icp(mesh.vertices * 40.0, surf, IcpParams(seed=4))
        assert abs(res.prescale - 1.0 / 40.0) < 1e-3
        assert res.error < 0.01

    def test_degenerate_cloud_aborts_unconverged(self):
        model = np.random.default_rng(19).normal(size=(100, 3))
        cloud = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
        res = icp(model, cloud, IcpParams(seed=0))
        assert not res.converged
        assert res.iterations == 1

    def test_empty_rejected(self):
        with pytest.raises(DegenerateGeometryError):
            icp(np.zeros((0, 3)), np.ones((10, 3)))

    def test_iterations_bounded(self, icp_meshes):
        mesh = icp_meshes["chair"]
        surf = sample_surface(mesh, 200, seed=77)
        res = icp(model_alignment_points(mesh, seed=5), surf + 0.3,
                  IcpParams(seed=5, max_iters=4))
        assert res.iterations <= 4


class TestModelAlignmentPoints:
    def test_dense_mesh_uses_vertices(self, icp_meshes):
        mesh = icp_meshes["mug"]
        assert np.array_equal(model_alignment_points(mesh, seed=0), mesh.vertices)

    def test_sparse_mesh_sampled_to_2000(self):
        from cloudsketch.geometry import TriangleMesh
        tetra = TriangleMesh(np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]),
                             [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
        pts = model_alignment_points(tetra, seed=7)
        assert pts.shape == (2000, 3)
        assert np.array_equal(pts, model_alignment_points(tetra, seed=7))


class TestSerialization:
    def test_roundtrip(self, icp_meshes):
        mesh = icp_meshes["table"]
        surf = sample_surface(mesh, 200, seed=88)
        res = icp(model_alignment_points(mesh, seed=6), surf, IcpParams(seed=6))
        text = serialize_icp_result(res)
        lines = text.splitlines()
        assert [l.split()[0] for l in lines] == ["rotation", "translation", "prescale",
                                                 "error", "iterations", "converged"]
        back = parse_icp_result(text)
        assert np.array_equal(back.transform.rotation, res.transform.rotation)
        assert np.array_equal(back.transform.translation, res.transform.translation)
        assert back.error == res.error
        assert back.iterations == res.iterations
        assert back.converged == res.converged
        assert back.prescale == res.prescale
