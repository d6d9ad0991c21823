"""Contour-extraction image chain and PNG helpers.

Grayscale images are (H, W) uint8 arrays; sketches/binary images are (H, W)
bool arrays with True = ink. The package-wide ink convention is dark strokes
on a light background, so PNG encoding maps True to 0 and False to 255, and
decoding treats values below the threshold as ink.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from . import kernels
from .errors import ParseError

DEFAULT_THRESHOLD = 128
DEFAULT_MEDIAN_K = 3
DEFAULT_STROKE = 1


@dataclass(frozen=True)
class Contour:
    """Closed border polyline in pixel coordinates.

    `points` is (N, 2) int32 rows of (x, y); consecutive points are
    8-adjacent and the last point connects back to the first. `is_outer`
    distinguishes region borders from hole borders.
    """

    points: np.ndarray
    is_outer: bool


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Luma conversion: round(0.299 R + 0.587 G + 0.114 B)."""
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] < 3:
        raise ValueError("expected an (H, W, 3) RGB array")
    arr = arr[:, :, :3].astype(np.float64)
    luma = 0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2]
    return np.clip(np.rint(luma), 0, 255).astype(np.uint8)


def median_filter(img: np.ndarray, k: int = DEFAULT_MEDIAN_K) -> np.ndarray:
    """k x k median filter with edge replication; k must be odd."""
    if k < 1 or k % 2 == 0:
        raise ValueError(f"median kernel size must be odd and >= 1, got {k}")
    arr = np.ascontiguousarray(img, np.uint8)
    if k == 1:
        return arr.copy()
    return kernels.median_filter_u8(arr, k)


def binarize(img: np.ndarray, threshold: int = DEFAULT_THRESHOLD) -> np.ndarray:
    """Ink where the pixel is darker than the threshold."""
    if not 0 <= threshold <= 255:
        raise ValueError("threshold must lie in [0, 255]")
    return np.asarray(img) < threshold


def trace_contours(img: np.ndarray) -> list[Contour]:
    """Closed border polylines of every foreground region (8-connected).

    Each region contributes its outer border; holes contribute borders
    flagged is_outer=False. An empty image yields an empty list.
    """
    mask = np.ascontiguousarray(np.asarray(img, bool), np.uint8)
    if not mask.any():
        return []
    points, offsets, outer = kernels.trace_borders(mask)
    contours = []
    for c in range(len(outer)):
        seg = points[offsets[c]:offsets[c + 1]]
        contours.append(Contour(points=seg[:, ::-1].copy(), is_outer=bool(outer[c])))
    return contours


def rasterize_contours(contours: list[Contour], width: int, height: int,
                       stroke: int = DEFAULT_STROKE) -> np.ndarray:
    """Draw closed contour polylines into a fresh (height, width) sketch.

    Contour points must lie inside the image; the stroke is a square brush
    of the given width (clipped at borders).
    """
    if stroke < 1:
        raise ValueError("stroke width must be >= 1")
    out = np.zeros((height, width), bool)
    r0 = (stroke - 1) // 2
    r1 = stroke // 2
    for contour in contours:
        pts = np.asarray(contour.points)
        if len(pts) == 0:
            continue
        if (pts[:, 0].min() < 0 or pts[:, 0].max() >= width
                or pts[:, 1].min() < 0 or pts[:, 1].max() >= height):
            raise ValueError("contour point outside image bounds")
        if stroke == 1:
            out[pts[:, 1], pts[:, 0]] = True
        else:
            for dx in range(-r0, r1 + 1):
                for dy in range(-r0, r1 + 1):
                    xs = np.clip(pts[:, 0] + dx, 0, width - 1)
                    ys = np.clip(pts[:, 1] + dy, 0, height - 1)
                    out[ys, xs] = True
    return out


def extract_model_contour(rendered: np.ndarray, canvas_w: int, canvas_h: int,
                          threshold: int = DEFAULT_THRESHOLD,
                          median_k: int = DEFAULT_MEDIAN_K,
                          stroke: int = DEFAULT_STROKE) -> np.ndarray:
    """Full chain from a rendered grayscale view to an editable contour sketch.

    grayscale -> median filter -> threshold -> border tracing -> contour
    rasterization at the canvas size. A blank render produces a blank sketch.
    """
    gray = np.asarray(rendered)
    if gray.ndim == 3:
        gray = to_grayscale(gray)
    filtered = median_filter(gray.astype(np.uint8), median_k)
    binary = binarize(filtered, threshold)
    contours = trace_contours(binary)
    h, w = binary.shape
    if (w, h) != (canvas_w, canvas_h):
        sx = canvas_w / w
        sy = canvas_h / h
        scaled = []
        for c in contours:
            pts = np.asarray(c.points, np.float64)
            pts = np.stack([np.clip(np.rint(pts[:, 0] * sx), 0, canvas_w - 1),
                            np.clip(np.rint(pts[:, 1] * sy), 0, canvas_h - 1)], axis=1)
            scaled.append(Contour(points=pts.astype(np.int32), is_outer=c.is_outer))
        contours = scaled
    return rasterize_contours(contours, canvas_w, canvas_h, stroke)


def mask_to_gray(mask: np.ndarray) -> np.ndarray:
    """Binary image to 8-bit grayscale: ink -> 0, background -> 255."""
    return np.where(np.asarray(mask, bool), 0, 255).astype(np.uint8)


def encode_png(img: np.ndarray) -> bytes:
    """Encode a grayscale (uint8) or binary (bool) image as 8-bit gray PNG."""
    arr = np.asarray(img)
    if arr.dtype == bool:
        arr = mask_to_gray(arr)
    buf = io.BytesIO()
    Image.fromarray(arr.astype(np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def decode_png_gray(data: bytes) -> np.ndarray:
    """Decode a PNG to (H, W) uint8 grayscale (color inputs go through luma)."""
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except Exception as exc:
        raise ParseError(f"not a decodable PNG image: {exc}") from None
    if img.mode in ("RGB", "RGBA"):
        return to_grayscale(np.asarray(img.convert("RGB")))
    return np.asarray(img.convert("L"))


def decode_png_sketch(data: bytes, threshold: int = DEFAULT_THRESHOLD) -> np.ndarray:
    """Decode a PNG into an ink mask (dark pixels are ink)."""
    return binarize(decode_png_gray(data), threshold)
