"""Parsers and writers for OFF meshes, XYZ / ASCII-PLY point clouds, and OBJ.

All readers accept bytes or str. Writers emit LF-terminated ASCII with
17-significant-digit floats so write/parse round trips are exact.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError, UnsupportedFormatError
from .geometry import TriangleMesh


def _as_text(data) -> str:
    if isinstance(data, (bytes, bytearray)):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8 text: {exc}") from None
    return data


def _fan_triangulate(indices: list[int]) -> list[tuple[int, int, int]]:
    return [(indices[0], indices[i], indices[i + 1]) for i in range(1, len(indices) - 1)]


def parse_off(data) -> TriangleMesh:
    """Parse an ASCII OFF mesh; polygon faces are fan-triangulated."""
    text = _as_text(data)
    # token stream with line tracking for error messages
    tokens: list[tuple[str, int]] = []
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        for tok in body.split():
            tokens.append((tok, ln))
    pos = 0

    def next_token(what: str):
        nonlocal pos
        if pos >= len(tokens):
            last = tokens[-1][1] if tokens else 1
            raise ParseError(f"unexpected end of file while reading {what}", line=last)
        tok = tokens[pos]
        pos += 1
        return tok

    def next_int(what: str) -> int:
        tok, ln = next_token(what)
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"expected integer {what}, got {tok!r}", line=ln) from None

    def next_float(what: str) -> float:
        tok, ln = next_token(what)
        try:
            return float(tok)
        except ValueError:
            raise ParseError(f"expected number {what}, got {tok!r}", line=ln) from None

    header, ln = next_token("OFF header")
    if header != "OFF":
        raise ParseError(f"not an OFF file (header token {header!r})", line=ln)
    nv = next_int("vertex count")
    nf = next_int("face count")
    next_int("edge count")
    if nv < 3:
        raise ParseError(f"OFF declares {nv} vertices; need at least 3")
    verts = np.empty((nv, 3), np.float64)
    for i in range(nv):
        for c in range(3):
            verts[i, c] = next_float(f"vertex {i} coordinate")
    if not np.isfinite(verts).all():
        raise ParseError("non-finite vertex coordinate")
    tris: list[tuple[int, int, int]] = []
    for i in range(nf):
        m = next_int(f"face {i} vertex count")
        if m < 3:
            raise ParseError(f"face {i} has {m} vertices; need at least 3")
        idx = []
        for k in range(m):
            j, ln = next_token(f"face {i} index")
            try:
                v = int(j)
            except ValueError:
                raise ParseError(f"expected face index, got {j!r}", line=ln) from None
            if v < 0 or v >= nv:
                raise ParseError(f"face {i} index {v} out of range [0, {nv})", line=ln)
            idx.append(v)
        tris.extend(_fan_triangulate(idx))
    faces = np.asarray(tris, np.int32).reshape(-1, 3)
    return TriangleMesh(verts, faces)


def parse_xyz(data) -> np.ndarray:
    """One x y z triple per line; extra columns ignored; blank lines skipped."""
    text = _as_text(data)
    rows = []
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.replace(",", " ").split()
        if len(parts) < 3:
            raise ParseError(f"expected at least 3 columns, got {len(parts)}", line=ln)
        try:
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError:
            raise ParseError(f"non-numeric coordinate in {body!r}", line=ln) from None
    if not rows:
        raise ParseError("no points found in xyz input")
    return np.asarray(rows, np.float64)


def parse_ply_ascii(data) -> np.ndarray:
    """ASCII PLY: reads the vertex element's x, y, z floats; other properties dropped."""
    text = _as_text(data)
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ParseError("not a PLY file (missing 'ply' magic)", line=1)
    elements: list[tuple[str, int]] = []
    vertex_props: list[str] = []
    in_vertex = False
    fmt_seen = False
    end = None
    for ln, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("comment") or line.startswith("obj_info"):
            continue
        if line.startswith("format"):
            parts = line.split()
            if len(parts) < 2 or parts[1] != "ascii":
                raise UnsupportedFormatError(
                    f"only ascii PLY is supported, got format {parts[1] if len(parts) > 1 else '?'}",
                    line=ln)
            fmt_seen = True
        elif line.startswith("element"):
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(f"malformed element declaration {line!r}", line=ln)
            try:
                count = int(parts[2])
            except ValueError:
                raise ParseError(f"non-integer element count in {line!r}", line=ln) from None
            elements.append((parts[1], count))
            in_vertex = parts[1] == "vertex"
        elif line.startswith("property"):
            if in_vertex:
                vertex_props.append(line.split()[-1])
        elif line == "end_header":
            end = ln
            break
        else:
            raise ParseError(f"unexpected header line {line!r}", line=ln)
    if end is None:
        raise ParseError("PLY header never ends (no end_header)")
    if not fmt_seen:
        raise ParseError("PLY header missing format line")
    try:
        xi, yi, zi = (vertex_props.index(c) for c in ("x", "y", "z"))
    except ValueError:
        raise ParseError("vertex element lacks x/y/z properties") from None
    body = [(ln, l.strip()) for ln, l in enumerate(lines[end:], start=end + 1) if l.strip()]
    cursor = 0
    points = None
    for name, count in elements:
        if cursor + count > len(body):
            raise ParseError(f"element '{name}' declares {count} rows but file has fewer")
        if name == "vertex":
            pts = np.empty((count, 3), np.float64)
            for r in range(count):
                ln, line = body[cursor + r]
                parts = line.split()
                if len(parts) < len(vertex_props):
                    raise ParseError(
                        f"vertex row has {len(parts)} values, expected {len(vertex_props)}",
                        line=ln)
                try:
                    pts[r] = (float(parts[xi]), float(parts[yi]), float(parts[zi]))
                except ValueError:
                    raise ParseError(f"non-numeric vertex value in {line!r}", line=ln) from None
            points = pts
        cursor += count
    if points is None:
        raise ParseError("PLY file has no vertex element")
    if len(points) == 0:
        raise ParseError("PLY vertex element is empty")
    return points


def parse_pointcloud(data, fmt: str) -> np.ndarray:
    if fmt == "xyz":
        return parse_xyz(data)
    if fmt in ("ply", "ply-ascii"):
        raw = data if isinstance(data, (bytes, bytearray)) else data.encode()
        if raw.lstrip().startswith(b"ply") and b"format binary" in raw[:256]:
            raise UnsupportedFormatError("binary PLY is not supported")
        return parse_ply_ascii(data)
    raise ValueError(f"unknown point cloud format {fmt!r}")


def sniff_pointcloud_format(data) -> str:
    raw = data if isinstance(data, (bytes, bytearray)) else str(data).encode()
    return "ply" if raw.lstrip().startswith(b"ply") else "xyz"


def write_xyz(points: np.ndarray) -> str:
    pts = np.asarray(points, np.float64)
    return "".join(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n" for p in pts)


def write_obj(mesh: TriangleMesh) -> str:
    """OBJ with v lines then 1-based f lines; exact text round trip."""
    out = []
    for v in mesh.vertices:
        out.append(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
    for f in mesh.faces:
        out.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
    return "".join(out)


def parse_obj(data) -> TriangleMesh:
    """Minimal OBJ reader: v and f records; polygons fan-triangulated."""
    text = _as_text(data)
    verts: list[tuple[float, float, float]] = []
    tris: list[tuple[int, int, int]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "v":
            if len(parts) < 4:
                raise ParseError("v record needs 3 coordinates", line=ln)
            try:
                verts.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError:
                raise ParseError(f"non-numeric vertex in {line!r}", line=ln) from None
        elif parts[0] == "f":
            idx = []
            for ref in parts[1:]:
                tok = ref.split("/", 1)[0]
                try:
                    v = int(tok)
                except ValueError:
                    raise ParseError(f"non-integer face index {ref!r}", line=ln) from None
                v = v - 1 if v > 0 else len(verts) + v
                if v < 0 or v >= len(verts):
                    raise ParseError(f"face index {ref!r} out of range", line=ln)
                idx.append(v)
            if len(idx) < 3:
                raise ParseError("face needs at least 3 indices", line=ln)
            tris.extend(_fan_triangulate(idx))
    if len(verts) < 3:
        raise ParseError("OBJ has fewer than 3 vertices")
    return TriangleMesh(np.asarray(verts, np.float64), np.asarray(tris, np.int32).reshape(-1, 3))
