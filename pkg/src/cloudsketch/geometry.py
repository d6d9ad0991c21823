"""Core 3D types and transforms.

Point clouds are plain (N, 3) float64 arrays; meshes pair a vertex array
with an int32 face-index array. All angles are radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray     # (F, 3) int32

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, np.float64))
        object.__setattr__(self, "faces", np.asarray(self.faces, np.int32).reshape(-1, 3))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def with_vertices(self, vertices: np.ndarray) -> "TriangleMesh":
        return TriangleMesh(vertices, self.faces)


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation; maps p to rotation @ p + translation."""

    rotation: np.ndarray     # (3, 3)
    translation: np.ndarray  # (3,)

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, np.float64).reshape(3, 3))
        object.__setattr__(self, "translation", np.asarray(self.translation, np.float64).reshape(3))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, np.float64)
        return pts @ self.rotation.T + self.translation

    def compose(self, inner: "RigidTransform") -> "RigidTransform":
        """self after inner: (self.compose(inner)).apply(p) == self.apply(inner.apply(p))."""
        return RigidTransform(self.rotation @ inner.rotation,
                              self.rotation @ inner.translation + self.translation)

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -(rt @ self.translation))

    def is_valid(self, tol: float = 1e-9) -> bool:
        r = self.rotation
        return (np.abs(r.T @ r - np.eye(3)).max() <= tol
                and abs(np.linalg.det(r) - 1.0) <= tol
                and np.isfinite(self.translation).all())


@dataclass(frozen=True)
class Viewpoint:
    """Unit view direction; the camera looks along -direction toward the origin."""

    direction: np.ndarray
    index: int = 0

    def __post_init__(self):
        d = np.asarray(self.direction, np.float64).reshape(3)
        n = np.linalg.norm(d)
        if not np.isfinite(n) or n == 0.0:
            raise DegenerateGeometryError("viewpoint direction must be a nonzero vector")
        object.__setattr__(self, "direction", d / n)


@dataclass(frozen=True)
class Normalization:
    """Similarity that was applied to bring a cloud to canonical frame.

    normalized = (p - centroid) * scale, with scale = 1 / aabb_diagonal.
    """

    centroid: np.ndarray
    scale: float

    def apply(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, np.float64) - self.centroid) * self.scale

    def invert(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, np.float64) / self.scale + self.centroid


def aabb(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(points, np.float64)
    if pts.size == 0:
        raise DegenerateGeometryError("empty point set has no bounding box")
    return pts.min(axis=0), pts.max(axis=0)


def aabb_diagonal(points: np.ndarray) -> float:
    lo, hi = aabb(points)
    return float(np.linalg.norm(hi - lo))


def normalize_unit(points: np.ndarray) -> tuple[np.ndarray, Normalization]:
    """Center a cloud on its centroid and scale its AABB diagonal to 1."""
    pts = np.asarray(points, np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) == 0:
        raise DegenerateGeometryError("expected a non-empty (N, 3) point array")
    diag = aabb_diagonal(pts)
    if diag <= 0.0:
        raise DegenerateGeometryError("all points coincide; cannot normalize")
    centroid = pts.mean(axis=0)
    record = Normalization(centroid=centroid, scale=1.0 / diag)
    return record.apply(pts), record


def fibonacci_viewpoints(n: int) -> list[Viewpoint]:
    """n near-uniform unit directions from the spherical Fibonacci lattice.

    z_i = 1 - 2i/n starts at the +z pole; azimuth advances by the golden
    angle. Deterministic in n.
    """
    if n < 1:
        raise ValueError("viewpoint count must be >= 1")
    i = np.arange(n, dtype=np.float64)
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * GOLDEN_ANGLE
    dirs = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return [Viewpoint(direction=dirs[k], index=k) for k in range(n)]


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a rotation of `angle` about `axis`."""
    a = np.asarray(axis, np.float64)
    a = a / np.linalg.norm(a)
    kx, ky, kz = a
    k = np.array([[0.0, -kz, ky], [kz, 0.0, -kx], [-ky, kx, 0.0]])
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def rotation_geodesic_angle(r1: np.ndarray, r2: np.ndarray) -> float:
    """Angle of the rotation taking r1 to r2 (radians)."""
    c = (np.trace(r1.T @ r2) - 1.0) / 2.0
    return math.acos(min(1.0, max(-1.0, c)))


def face_areas(mesh: TriangleMesh) -> np.ndarray:
    v = mesh.vertices
    f = mesh.faces
    e1 = v[f[:, 1]] - v[f[:, 0]]
    e2 = v[f[:, 2]] - v[f[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)


def surface_area(mesh: TriangleMesh) -> float:
    return float(face_areas(mesh).sum())


def sample_surface(mesh: TriangleMesh, n: int, seed: int = 0) -> np.ndarray:
    """n area-weighted uniform samples on the mesh surface (seeded)."""
    if mesh.n_faces == 0:
        raise DegenerateGeometryError("mesh has no faces to sample")
    areas = face_areas(mesh)
    total = areas.sum()
    if total <= 0.0:
        raise DegenerateGeometryError("mesh surface area is zero")
    rng = np.random.default_rng(seed)
    face_idx = rng.choice(mesh.n_faces, size=n, p=areas / total)
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    tri = mesh.vertices[mesh.faces[face_idx]]
    return (tri[:, 0]
            + u[:, None] * (tri[:, 1] - tri[:, 0])
            + v[:, None] * (tri[:, 2] - tri[:, 0]))
