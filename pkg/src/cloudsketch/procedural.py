"""Procedural OFF corpus for demos and tests.

Five distinct categories (ball, box, ring, mug, chair) plus a table, each a
tessellated parametric surface. `scale` multiplies tessellation density, not
object size; every generator is deterministic.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .geometry import TriangleMesh


def _grid(nu: int, nv: int, wrap_u: bool = False, wrap_v: bool = False,
          base: int = 0) -> np.ndarray:
    """Quad-grid triangulation over an (nu x nv) vertex lattice."""
    faces = []
    ui_max = nu if wrap_u else nu - 1
    vi_max = nv if wrap_v else nv - 1
    for i in range(ui_max):
        i2 = (i + 1) % nu
        for j in range(vi_max):
            j2 = (j + 1) % nv
            a = base + i * nv + j
            b = base + i2 * nv + j
            c = base + i2 * nv + j2
            d = base + i * nv + j2
            faces.append((a, b, c))
            faces.append((a, c, d))
    return np.asarray(faces, np.int32)


def _surface(fn, nu: int, nv: int, wrap_u: bool = False, wrap_v: bool = False) -> TriangleMesh:
    us = np.linspace(0.0, 1.0, nu, endpoint=not wrap_u)
    vs = np.linspace(0.0, 1.0, nv, endpoint=not wrap_v)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    verts = fn(uu.ravel(), vv.ravel())
    return TriangleMesh(verts, _grid(nu, nv, wrap_u, wrap_v))


def _merge(meshes: list[TriangleMesh]) -> TriangleMesh:
    verts = []
    faces = []
    base = 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + base)
        base += m.n_vertices
    return TriangleMesh(np.concatenate(verts), np.concatenate(faces))


def _box_part(center, size, k: float) -> TriangleMesh:
    """Axis-aligned box tessellated so vertex spacing is ~1/k model units."""
    cx, cy, cz = center
    sx, sy, sz = size
    nx = max(2, int(math.ceil(sx * k)) + 1)
    ny = max(2, int(math.ceil(sy * k)) + 1)
    nz = max(2, int(math.ceil(sz * k)) + 1)
    parts = []
    for axis, sign in ((0, -1), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)):
        if axis == 0:
            nu, nv = ny, nz
        elif axis == 1:
            nu, nv = nx, nz
        else:
            nu, nv = nx, ny

        def face(u, v, axis=axis, sign=sign):
            pts = np.empty((len(u), 3))
            if axis == 0:
                pts[:, 0] = cx + sign * sx / 2
                pts[:, 1] = cy + (u - 0.5) * sy
                pts[:, 2] = cz + (v - 0.5) * sz
            elif axis == 1:
                pts[:, 0] = cx + (u - 0.5) * sx
                pts[:, 1] = cy + sign * sy / 2
                pts[:, 2] = cz + (v - 0.5) * sz
            else:
                pts[:, 0] = cx + (u - 0.5) * sx
                pts[:, 1] = cy + (v - 0.5) * sy
                pts[:, 2] = cz + sign * sz / 2
            return pts

        parts.append(_surface(face, nu, nv))
    return _merge(parts)


def make_ball(scale: float = 1.0) -> TriangleMesh:
    n = max(8, int(round(32 * scale)))

    def sphere(u, v):
        theta = u * 2.0 * np.pi
        phi = v * np.pi
        return np.stack([np.sin(phi) * np.cos(theta),
                         np.sin(phi) * np.sin(theta),
                         np.cos(phi)], axis=1)

    return _surface(sphere, 2 * n, n + 1, wrap_u=True)


def make_box(scale: float = 1.0) -> TriangleMesh:
    return _box_part((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), 26.0 * scale)


def make_ring(scale: float = 1.0) -> TriangleMesh:
    n = max(8, int(round(40 * scale)))
    big, small = 1.0, 0.45

    def torus(u, v):
        theta = u * 2.0 * np.pi
        phi = v * 2.0 * np.pi
        rad = big + small * np.cos(phi)
        return np.stack([rad * np.cos(theta), rad * np.sin(theta),
                         small * np.sin(phi)], axis=1)

    return _surface(torus, 2 * n, n, wrap_u=True, wrap_v=True)


def make_mug(scale: float = 1.0) -> TriangleMesh:
    n = max(8, int(round(36 * scale)))
    radius, height = 0.5, 1.2

    def side(u, v):
        theta = u * 2.0 * np.pi
        return np.stack([radius * np.cos(theta), radius * np.sin(theta),
                         v * height], axis=1)

    def bottom(u, v):
        theta = u * 2.0 * np.pi
        r = v * radius
        return np.stack([r * np.cos(theta), r * np.sin(theta),
                         np.zeros_like(u)], axis=1)

    def handle(u, v):
        theta = u * 2.0 * np.pi
        phi = v * 2.0 * np.pi
        big, small = 0.32, 0.08
        cx = radius + 0.18
        ring_x = cx + (big + small * np.cos(phi)) * np.cos(theta)
        ring_z = 0.6 + (big + small * np.cos(phi)) * np.sin(theta)
        return np.stack([ring_x, small * np.sin(phi), ring_z], axis=1)

    return _merge([
        _surface(side, 2 * n, n, wrap_u=True),
        _surface(bottom, 2 * n, max(4, n // 2), wrap_u=True),
        _surface(handle, n, max(8, n // 2), wrap_u=True, wrap_v=True),
    ])


def make_chair(scale: float = 1.0) -> TriangleMesh:
    # seat narrower than deep and a back strip offset behind it, so no
    # viewing direction collapses the chair to a plain square
    k = 16.0 * scale
    parts = [_box_part((0.0, 0.03, 0.55), (1.0, 0.84, 0.1), k),
             _box_part((0.0, -0.49, 1.05), (1.0, 0.1, 0.9), k)]
    for sx in (-0.4, 0.4):
        for sy in (-0.3, 0.35):
            parts.append(_box_part((sx, sy, 0.25), (0.1, 0.1, 0.5), k))
    return _merge(parts)


def make_table(scale: float = 1.0) -> TriangleMesh:
    k = 14.0 * scale
    parts = [_box_part((0.0, 0.0, 0.75), (1.4, 1.4, 0.1), k)]
    for sx in (-0.6, 0.6):
        for sy in (-0.6, 0.6):
            parts.append(_box_part((sx, sy, 0.375), (0.1, 0.1, 0.75), k))
    return _merge(parts)


GENERATORS = {
    "ball": make_ball,
    "box": make_box,
    "ring": make_ring,
    "mug": make_mug,
    "chair": make_chair,
    "table": make_table,
}

DEMO_CATEGORIES = ("ball", "box", "ring", "mug", "chair")


def mesh_to_off(mesh: TriangleMesh) -> str:
    lines = [f"OFF\n{mesh.n_vertices} {mesh.n_faces} 0\n"]
    for v in mesh.vertices:
        lines.append(f"{v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
    for f in mesh.faces:
        lines.append(f"3 {f[0]} {f[1]} {f[2]}\n")
    return "".join(lines)


def write_demo_corpus(out_dir, categories=DEMO_CATEGORIES, scale: float = 1.0) -> list[Path]:
    """One OFF mesh per category, each under its own category directory."""
    out_dir = Path(out_dir)
    written = []
    for name in categories:
        mesh = GENERATORS[name](scale)
        path = out_dir / name / f"{name}_0.off"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(mesh_to_off(mesh))
        written.append(path)
    return written
