"""Orthographic silhouette rasterization and point projection.

Both operations share one camera/fit rule so rendered silhouettes and
projected cloud points are co-registered: orthographic projection onto the
camera plane, uniform scale to fit the image minus a margin fraction on each
side, centered on the footprint's bounding box. Pixel centers sample at
(x + 0.5, y + 0.5), origin top-left, y down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateGeometryError
from .geometry import TriangleMesh, Viewpoint


@dataclass(frozen=True)
class CameraFrame:
    """Right-handed orthonormal basis: right x up = forward."""

    right: np.ndarray
    up: np.ndarray
    forward: np.ndarray

    def matrix(self) -> np.ndarray:
        return np.stack([self.right, self.up, self.forward])


def camera_basis(view: Viewpoint) -> CameraFrame:
    """Build the camera frame for a view direction.

    forward = -direction; up is world +z projected perpendicular to forward
    (world +x seeds the projection when the direction is within ~2.5 degrees
    of the z axis); right = up x forward.
    """
    d = view.direction
    forward = -d
    seed = np.array([0.0, 0.0, 1.0]) if abs(d[2]) <= 0.999 else np.array([1.0, 0.0, 0.0])
    up = seed - np.dot(seed, forward) * forward
    up = up / np.linalg.norm(up)
    right = np.cross(up, forward)
    return CameraFrame(right=right, up=up, forward=forward)


def _fit_to_image(u: np.ndarray, v: np.ndarray, width: int, height: int,
                  margin: float) -> tuple[np.ndarray, np.ndarray]:
    """Map camera-plane coords to pixel coords: fit, center, flip y."""
    umin, umax = float(u.min()), float(u.max())
    vmin, vmax = float(v.min()), float(v.max())
    du, dv = umax - umin, vmax - vmin
    usable_w = (1.0 - 2.0 * margin) * width
    usable_h = (1.0 - 2.0 * margin) * height
    if du <= 0.0 and dv <= 0.0:
        scale = 1.0
    elif du <= 0.0:
        scale = usable_h / dv
    elif dv <= 0.0:
        scale = usable_w / du
    else:
        scale = min(usable_w / du, usable_h / dv)
    cu, cv = (umin + umax) / 2.0, (vmin + vmax) / 2.0
    px = width / 2.0 + (u - cu) * scale
    py = height / 2.0 - (v - cv) * scale
    return px, py


def _project(points: np.ndarray, frame: CameraFrame) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(points, np.float64)
    return pts @ frame.right, pts @ frame.up


def rasterize_silhouette(mesh: TriangleMesh, view: Viewpoint, width: int, height: int,
                         margin: float = 0.1) -> np.ndarray:
    """Filled orthographic silhouette of a mesh as a (H, W) bool mask.

    The silhouette is the union of all projected triangles (no depth test);
    a pixel is foreground when its center lies inside some triangle.
    Raises on empty meshes and on projections where all vertices are
    collinear in 2D.
    """
    if width < 16 or height < 16:
        raise ValueError("silhouette images must be at least 16x16")
    if not 0.0 <= margin < 0.5:
        raise ValueError("margin must lie in [0, 0.5)")
    if mesh.n_vertices == 0 or mesh.n_faces == 0:
        raise DegenerateGeometryError("cannot rasterize an empty mesh")
    frame = camera_basis(view)
    u, v = _project(mesh.vertices, frame)
    coords = np.stack([u, v], axis=1)
    centered = coords - coords.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= 1e-12 * sv[0]:
        raise DegenerateGeometryError("projection is degenerate: vertices collinear in 2D")
    px, py = _fit_to_image(u, v, width, height, margin)
    tris = np.empty((mesh.n_faces, 3, 2), np.float64)
    tris[:, :, 0] = px[mesh.faces]
    tris[:, :, 1] = py[mesh.faces]
    return kernels.fill_triangles(tris, width, height).astype(bool)


def project_points(points: np.ndarray, view: Viewpoint, width: int, height: int,
                   margin: float = 0.1) -> np.ndarray:
    """Project cloud points with the same camera and fit rules as the rasterizer.

    Returns (N, 2) float64 pixel coordinates (x, y).
    """
    pts = np.asarray(points, np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) == 0:
        raise DegenerateGeometryError("expected a non-empty (N, 3) point array")
    frame = camera_basis(view)
    u, v = _project(pts, frame)
    px, py = _fit_to_image(u, v, width, height, margin)
    return np.stack([px, py], axis=1)
