"""Numba-jitted kernel implementations (default backend).

Same contracts as _kernels_numpy; see that module for parameter docs. The
rasterizer keeps the identical edge-function arithmetic so the two backends
agree bit-for-bit.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def fill_triangles(tris, width, height):
    out = np.zeros((height, width), np.uint8)
    for t in range(tris.shape[0]):
        x0, y0 = tris[t, 0, 0], tris[t, 0, 1]
        x1, y1 = tris[t, 1, 0], tris[t, 1, 1]
        x2, y2 = tris[t, 2, 0], tris[t, 2, 1]
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area2 == 0.0:
            continue
        if area2 < 0.0:
            tx, ty = x1, y1
            x1, y1 = x2, y2
            x2, y2 = tx, ty
        xmin = min(x0, min(x1, x2))
        xmax = max(x0, max(x1, x2))
        ymin = min(y0, min(y1, y2))
        ymax = max(y0, max(y1, y2))
        xlo = max(int(np.ceil(xmin - 0.5)), 0)
        xhi = min(int(np.floor(xmax - 0.5)), width - 1)
        ylo = max(int(np.ceil(ymin - 0.5)), 0)
        yhi = min(int(np.floor(ymax - 0.5)), height - 1)
        for py in range(ylo, yhi + 1):
            cy = py + 0.5
            for px in range(xlo, xhi + 1):
                cx = px + 0.5
                w0 = (x1 - x0) * (cy - y0) - (y1 - y0) * (cx - x0)
                if w0 < 0.0:
                    continue
                w1 = (x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1)
                if w1 < 0.0:
                    continue
                w2 = (x0 - x2) * (cy - y2) - (y0 - y2) * (cx - x2)
                if w2 >= 0.0:
                    out[py, px] = 1
    return out


@njit(cache=True)
def median_filter_u8(img, k):
    h, w = img.shape
    r = k // 2
    out = np.empty_like(img)
    buf = np.empty(k * k, img.dtype)
    mid = (k * k) // 2
    for y in range(h):
        for x in range(w):
            n = 0
            for dy in range(-r, r + 1):
                yy = y + dy
                if yy < 0:
                    yy = 0
                elif yy >= h:
                    yy = h - 1
                for dx in range(-r, r + 1):
                    xx = x + dx
                    if xx < 0:
                        xx = 0
                    elif xx >= w:
                        xx = w - 1
                    buf[n] = img[yy, xx]
                    n += 1
            for i in range(1, n):  # insertion sort beats np.sort at k*k <= 81
                key = buf[i]
                j = i - 1
                while j >= 0 and buf[j] > key:
                    buf[j + 1] = buf[j]
                    j -= 1
                buf[j + 1] = key
            out[y, x] = buf[mid]
    return out


@njit(cache=True)
def _follow_border(f, si, sj, i2, j2, nbd, dy, dx, pts, npts):
    # locate the direction index of (i2, j2) around (si, sj)
    d = 0
    for k in range(8):
        if si + dy[k] == i2 and sj + dx[k] == j2:
            d = k
            break
    i1 = -1
    j1 = -1
    for _ in range(8):
        if f[si + dy[d], sj + dx[d]] != 0:
            i1 = si + dy[d]
            j1 = sj + dx[d]
            break
        d = (d - 1) % 8
    if i1 < 0:
        f[si, sj] = -nbd
        if npts >= pts.shape[0]:
            grown = np.empty((pts.shape[0] * 2, 2), np.int32)
            grown[:npts] = pts[:npts]
            pts = grown
        pts[npts, 0] = si
        pts[npts, 1] = sj
        return pts, npts + 1
    i2, j2 = i1, j1
    i3, j3 = si, sj
    while True:
        d = 0
        for k in range(8):
            if i3 + dy[k] == i2 and j3 + dx[k] == j2:
                d = k
                break
        d = (d + 1) % 8
        east_zero = False
        while f[i3 + dy[d], j3 + dx[d]] == 0:
            if d == 0:
                east_zero = True
            d = (d + 1) % 8
        i4 = i3 + dy[d]
        j4 = j3 + dx[d]
        if east_zero:
            f[i3, j3] = -nbd
        elif f[i3, j3] == 1:
            f[i3, j3] = nbd
        if npts >= pts.shape[0]:
            grown = np.empty((pts.shape[0] * 2, 2), np.int32)
            grown[:npts] = pts[:npts]
            pts = grown
        pts[npts, 0] = i3
        pts[npts, 1] = j3
        npts += 1
        if i4 == si and j4 == sj and i3 == i1 and j3 == j1:
            return pts, npts
        i2, j2 = i3, j3
        i3, j3 = i4, j4


@njit(cache=True)
def _trace_borders_core(f):
    h2, w2 = f.shape
    dy = np.array((0, -1, -1, -1, 0, 1, 1, 1), np.int64)
    dx = np.array((1, 1, 0, -1, -1, -1, 0, 1), np.int64)
    pts = np.empty((256, 2), np.int32)
    npts = 0
    offsets = np.empty(257, np.int64)
    outer = np.empty(256, np.uint8)
    ncont = 0
    offsets[0] = 0
    nbd = 1
    for i in range(1, h2 - 1):
        for j in range(1, w2 - 1):
            v = f[i, j]
            if v == 0:
                continue
            if v == 1 and f[i, j - 1] == 0:
                is_outer = True
                j2 = j - 1
            elif v >= 1 and f[i, j + 1] == 0:
                is_outer = False
                j2 = j + 1
            else:
                continue
            nbd += 1
            pts, npts = _follow_border(f, i, j, i, j2, nbd, dy, dx, pts, npts)
            if ncont >= outer.shape[0]:
                grown_off = np.empty(offsets.shape[0] * 2, np.int64)
                grown_off[:ncont + 1] = offsets[:ncont + 1]
                offsets = grown_off
                grown_fl = np.empty(outer.shape[0] * 2, np.uint8)
                grown_fl[:ncont] = outer[:ncont]
                outer = grown_fl
            outer[ncont] = 1 if is_outer else 0
            ncont += 1
            offsets[ncont] = npts
    return pts[:npts], offsets[:ncont + 1], outer[:ncont]


def trace_borders(mask):
    h, w = mask.shape
    f = np.zeros((h + 2, w + 2), np.int32)
    f[1:-1, 1:-1] = mask != 0
    points, offsets, outer = _trace_borders_core(f)
    points = points - 1
    return points, offsets.copy(), outer.copy()


@njit(cache=True)
def descriptor_bins(mag, binmap, xs, ys, patch, tiles, nbins):
    h, w = mag.shape
    half = patch // 2
    dim = tiles * tiles * nbins
    out = np.zeros((xs.shape[0], dim), np.float64)
    for i in range(xs.shape[0]):
        y0 = ys[i] - half
        x0 = xs[i] - half
        for wy in range(patch):
            yy = y0 + wy
            if yy < 0 or yy >= h:
                continue
            ty = (wy * tiles) // patch
            for wx in range(patch):
                xx = x0 + wx
                if xx < 0 or xx >= w:
                    continue
                m = mag[yy, xx]
                if m <= 0.0:
                    continue
                tx = (wx * tiles) // patch
                out[i, (ty * tiles + tx) * nbins + binmap[yy, xx]] += m
    return out


@njit(cache=True)
def nearest_centroid(x, centroids):
    n = x.shape[0]
    k = centroids.shape[0]
    dim = x.shape[1]
    out = np.empty(n, np.int64)
    for i in range(n):
        best = 0
        bestd = np.inf
        for c in range(k):
            s = 0.0
            for j in range(dim):
                diff = x[i, j] - centroids[c, j]
                s += diff * diff
                if s > bestd:
                    break
            if s < bestd:
                bestd = s
                best = c
        out[i] = best
    return out
