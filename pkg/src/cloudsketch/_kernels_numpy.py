"""Pure-numpy kernel implementations.

Fallback path for environments without numba (or with CLOUDSKETCH_PURE_NUMPY
set). Each function has the same contract as its twin in _kernels_numba; the
rasterizer uses the exact same edge-function arithmetic so both backends
produce bit-identical masks.
"""

import numpy as np

_NEIGHBOR_DY = (0, -1, -1, -1, 0, 1, 1, 1)
_NEIGHBOR_DX = (1, 1, 0, -1, -1, -1, 0, 1)


def fill_triangles(tris: np.ndarray, width: int, height: int) -> np.ndarray:
    """Rasterize the union of 2D triangles into a 0/1 uint8 mask.

    `tris` is (T, 3, 2) float64 in pixel coordinates (x, y), y down. A pixel
    is set when its center (x+0.5, y+0.5) satisfies all three inclusive edge
    tests of a counterclockwise-oriented triangle. Degenerate (zero-area)
    triangles are skipped.
    """
    out = np.zeros((height, width), np.uint8)
    for t in range(tris.shape[0]):
        x0, y0 = tris[t, 0, 0], tris[t, 0, 1]
        x1, y1 = tris[t, 1, 0], tris[t, 1, 1]
        x2, y2 = tris[t, 2, 0], tris[t, 2, 1]
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area2 == 0.0:
            continue
        if area2 < 0.0:
            x1, y1, x2, y2 = x2, y2, x1, y1
        xlo = max(int(np.ceil(min(x0, x1, x2) - 0.5)), 0)
        xhi = min(int(np.floor(max(x0, x1, x2) - 0.5)), width - 1)
        ylo = max(int(np.ceil(min(y0, y1, y2) - 0.5)), 0)
        yhi = min(int(np.floor(max(y0, y1, y2) - 0.5)), height - 1)
        if xlo > xhi or ylo > yhi:
            continue
        cx = np.arange(xlo, xhi + 1, dtype=np.float64) + 0.5
        cy = (np.arange(ylo, yhi + 1, dtype=np.float64) + 0.5)[:, None]
        w0 = (x1 - x0) * (cy - y0) - (y1 - y0) * (cx - x0)
        w1 = (x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1)
        w2 = (x0 - x2) * (cy - y2) - (y0 - y2) * (cx - x2)
        inside = (w0 >= 0.0) & (w1 >= 0.0) & (w2 >= 0.0)
        region = out[ylo:yhi + 1, xlo:xhi + 1]
        region[inside] = 1
    return out


def median_filter_u8(img: np.ndarray, k: int) -> np.ndarray:
    """k x k median with edge-replicated borders; k odd."""
    r = k // 2
    padded = np.pad(img, r, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (k, k))
    med = np.median(windows.reshape(img.shape[0], img.shape[1], k * k), axis=2)
    return med.astype(img.dtype)


def trace_borders(mask: np.ndarray):
    """Border following over a 0/1 uint8 mask (8-connected foreground).

    Returns (points, offsets, outer_flags): `points` is (N, 2) int32 rows of
    (y, x); contour c spans points[offsets[c]:offsets[c+1]]; outer_flags[c]
    is 1 for an outer border, 0 for a hole border. Border sequences are
    closed cycles of 8-adjacent pixels; the first point is not repeated.
    """
    h, w = mask.shape
    f = np.zeros((h + 2, w + 2), np.int32)
    f[1:-1, 1:-1] = mask != 0
    pts_y: list[int] = []
    pts_x: list[int] = []
    offsets = [0]
    outer = []
    nbd = 1
    for i in range(1, h + 1):
        row = f[i]
        for j in range(1, w + 1):
            v = row[j]
            if v == 0:
                continue
            if v == 1 and f[i, j - 1] == 0:
                is_outer = True
            elif v >= 1 and f[i, j + 1] == 0:
                is_outer = False
            else:
                continue
            nbd += 1
            j2 = j - 1 if is_outer else j + 1
            _follow_border(f, i, j, i, j2, nbd, pts_y, pts_x)
            offsets.append(len(pts_y))
            outer.append(1 if is_outer else 0)
    points = np.empty((len(pts_y), 2), np.int32)
    points[:, 0] = np.asarray(pts_y, np.int32) - 1
    points[:, 1] = np.asarray(pts_x, np.int32) - 1
    return points, np.asarray(offsets, np.int64), np.asarray(outer, np.uint8)


def _follow_border(f, si, sj, i2, j2, nbd, pts_y, pts_x):
    dy = _NEIGHBOR_DY
    dx = _NEIGHBOR_DX
    d = _direction(si, sj, i2, j2)
    i1 = j1 = -1
    for _ in range(8):
        if f[si + dy[d], sj + dx[d]] != 0:
            i1, j1 = si + dy[d], sj + dx[d]
            break
        d = (d - 1) % 8
    if i1 < 0:
        f[si, sj] = -nbd
        pts_y.append(si)
        pts_x.append(sj)
        return
    i2, j2 = i1, j1
    i3, j3 = si, sj
    while True:
        d = (_direction(i3, j3, i2, j2) + 1) % 8
        east_zero = False
        while f[i3 + dy[d], j3 + dx[d]] == 0:
            if d == 0:
                east_zero = True
            d = (d + 1) % 8
        i4, j4 = i3 + dy[d], j3 + dx[d]
        if east_zero:
            f[i3, j3] = -nbd
        elif f[i3, j3] == 1:
            f[i3, j3] = nbd
        pts_y.append(i3)
        pts_x.append(j3)
        if i4 == si and j4 == sj and i3 == i1 and j3 == j1:
            return
        i2, j2 = i3, j3
        i3, j3 = i4, j4


def _direction(iy, ix, ny, nx):
    dy = ny - iy
    dx = nx - ix
    for d in range(8):
        if _NEIGHBOR_DY[d] == dy and _NEIGHBOR_DX[d] == dx:
            return d
    raise ValueError("pixels not 8-adjacent")


def descriptor_bins(mag: np.ndarray, binmap: np.ndarray, xs: np.ndarray,
                    ys: np.ndarray, patch: int, tiles: int, nbins: int) -> np.ndarray:
    """Accumulate magnitude-weighted orientation histograms per keypoint.

    For each keypoint, gathers the patch x patch window (upper-left corner at
    keypoint - patch//2; out-of-image pixels contribute nothing), splits it
    into tiles x tiles cells, and sums gradient magnitude into nbins
    orientation bins per cell. Output is (K, tiles*tiles*nbins), unnormalized.
    """
    h, w = mag.shape
    half = patch // 2
    dim = tiles * tiles * nbins
    out = np.zeros((len(xs), dim), np.float64)
    wy = np.arange(patch)
    tile_y = (wy * tiles) // patch
    tile_code = (tile_y[:, None] * tiles + tile_y[None, :]) * nbins
    for i in range(len(xs)):
        y0 = int(ys[i]) - half
        x0 = int(xs[i]) - half
        ya, yb = max(y0, 0), min(y0 + patch, h)
        xa, xb = max(x0, 0), min(x0 + patch, w)
        if ya >= yb or xa >= xb:
            continue
        m = mag[ya:yb, xa:xb]
        codes = tile_code[ya - y0:yb - y0, xa - x0:xb - x0] + binmap[ya:yb, xa:xb]
        nz = m > 0.0
        if not nz.any():
            continue
        out[i] = np.bincount(codes[nz].ravel(), weights=m[nz].ravel(), minlength=dim)
    return out


def nearest_centroid(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid (squared Euclidean) per row of x.

    Ties resolve to the lowest centroid index.
    """
    n = x.shape[0]
    out = np.empty(n, np.int64)
    step = max(1, 2 ** 22 // max(1, centroids.size))
    for a in range(0, n, step):
        b = min(a + step, n)
        d2 = ((x[a:b, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        out[a:b] = np.argmin(d2, axis=1)
    return out
