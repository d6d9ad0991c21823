"""Sketch similarity search.

A sketch is turned into a bag of visual words: gradient-orientation
descriptors sampled at ink pixels, quantized against a k-means vocabulary,
tf-idf weighted, and scored by cosine against an inverted index of contour
images. Per-model similarity is the max over that model's views.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import (BadMagicError, BlankSketchError, TruncatedIndexError,
                     UnknownVersionError, VocabularyError)

INDEX_MAGIC = "SKETCHBOF"
INDEX_VERSION = 1


@dataclass(frozen=True)
class DescriptorParams:
    """Local-descriptor configuration (defaults sized for desk-scale corpora)."""

    patch: int = 32
    tiles: int = 4
    bins: int = 4
    keypoints: int = 500
    seed: int = 0

    @property
    def dim(self) -> int:
        return self.tiles * self.tiles * self.bins


@dataclass(frozen=True)
class Vocabulary:
    centroids: np.ndarray  # (k, dim) float64
    seed: int

    @property
    def k(self) -> int:
        return len(self.centroids)


@dataclass(frozen=True)
class RetrievalHit:
    model_id: int
    view_index: int
    similarity: float


@dataclass
class InvertedIndex:
    idf: np.ndarray                               # (k,) float64
    postings: list[tuple[np.ndarray, np.ndarray]]  # term -> (image ids u32, weights f64)
    images: list[tuple[int, int]]                  # image id -> (model id, view index)
    params: DescriptorParams
    manifest_hash: str = ""
    manifest_path: str = ""

    @property
    def k(self) -> int:
        return len(self.idf)

    @property
    def n_images(self) -> int:
        return len(self.images)


def sobel(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel gradients of an ink mask, edge-replicated borders, y down."""
    img = np.asarray(mask, np.float64)
    p = np.pad(img, 1, mode="edge")
    dx = p[:, 2:] - p[:, :-2]
    gx = dx[:-2, :] + 2.0 * dx[1:-1, :] + dx[2:, :]
    dy = p[2:, :] - p[:-2, :]
    gy = dy[:, :-2] + 2.0 * dy[:, 1:-1] + dy[:, 2:]
    return gx, gy


def _gradient_maps(sketch: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray]:
    gx, gy = sobel(sketch)
    mag = np.hypot(gx, gy)
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    binmap = np.minimum((theta * (bins / np.pi)).astype(np.int64), bins - 1)
    return mag, binmap


def sample_keypoints(sketch: np.ndarray, m: int = 500, seed: int = 0) -> np.ndarray:
    """Up to m distinct ink pixels, uniformly sampled with a seeded generator.

    Returns (K, 2) int64 rows of (x, y) in raster scan order. If the sketch
    has at most m ink pixels they are all returned.
    """
    ink = np.argwhere(np.asarray(sketch, bool))
    if len(ink) == 0:
        raise BlankSketchError("sketch has no ink pixels")
    if len(ink) > m:
        rng = np.random.default_rng(seed)
        sel = np.sort(rng.choice(len(ink), size=m, replace=False))
        ink = ink[sel]
    return ink[:, ::-1].astype(np.int64)


def _normalize_rows(desc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(desc, axis=1)
    nonzero = norms > 0.0
    out = desc.copy()
    out[nonzero] /= norms[nonzero, None]
    return out, nonzero


def sketch_descriptors(sketch: np.ndarray, params: DescriptorParams = DescriptorParams(),
                       keypoints: np.ndarray | None = None) -> np.ndarray:
    """L2-normalized descriptors at sampled keypoints; empty patches dropped."""
    if keypoints is None:
        keypoints = sample_keypoints(sketch, params.keypoints, params.seed)
    mag, binmap = _gradient_maps(sketch, params.bins)
    raw = kernels.descriptor_bins(mag, binmap,
                                  np.ascontiguousarray(keypoints[:, 0]),
                                  np.ascontiguousarray(keypoints[:, 1]),
                                  params.patch, params.tiles, params.bins)
    desc, nonzero = _normalize_rows(raw)
    return desc[nonzero]


def local_descriptor(sketch: np.ndarray, keypoint, params: DescriptorParams = DescriptorParams()) -> np.ndarray:
    """Descriptor for one keypoint (x, y); all-zero when the patch is empty."""
    kp = np.asarray(keypoint, np.int64).reshape(1, 2)
    mag, binmap = _gradient_maps(sketch, params.bins)
    raw = kernels.descriptor_bins(mag, binmap, kp[:, 0].copy(), kp[:, 1].copy(),
                                  params.patch, params.tiles, params.bins)
    desc, _ = _normalize_rows(raw)
    return desc[0]


def build_vocabulary(sample: np.ndarray, k: int = 256, iters: int = 25,
                     seed: int = 0) -> Vocabulary:
    """Lloyd k-means with seeded k-means++ init.

    Empty clusters are re-seeded from the point currently farthest from its
    centroid. Deterministic for a given sample and seed.
    """
    x = np.asarray(sample, np.float64)
    if x.ndim != 2:
        raise VocabularyError("descriptor sample must be a 2D array")
    n = len(x)
    if k < 2:
        raise VocabularyError("vocabulary size must be >= 2")
    if n < k:
        raise VocabularyError(f"sample of {n} descriptors is smaller than k={k}")
    rng = np.random.default_rng(seed)
    centroids = np.empty((k, x.shape[1]), np.float64)
    centroids[0] = x[rng.integers(n)]
    d2 = ((x - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centroids[c] = x[idx]
        d2 = np.minimum(d2, ((x - centroids[c]) ** 2).sum(axis=1))

    x_sq = (x ** 2).sum(axis=1)
    prev = None
    for _ in range(iters):
        d2_all = x_sq[:, None] - 2.0 * (x @ centroids.T) + (centroids ** 2).sum(axis=1)[None, :]
        assign = np.argmin(d2_all, axis=1)
        if prev is not None and np.array_equal(assign, prev):
            break
        prev = assign
        counts = np.bincount(assign, minlength=k).astype(np.float64)
        sums = np.zeros_like(centroids)
        np.add.at(sums, assign, x)
        if (counts == 0).any():
            own = np.take_along_axis(d2_all, assign[:, None], axis=1)[:, 0].copy()
            for e in np.nonzero(counts == 0)[0]:
                j = int(np.argmax(own))
                if own[j] < 0:
                    break
                old = assign[j]
                sums[old] -= x[j]
                counts[old] -= 1.0
                sums[e] = x[j]
                counts[e] = 1.0
                assign[j] = e
                own[j] = -1.0
        centroids = sums / np.maximum(counts, 1.0)[:, None]
    return Vocabulary(centroids=centroids, seed=seed)


def nearest_terms(descriptors: np.ndarray, vocab: Vocabulary) -> np.ndarray:
    """Nearest-centroid term id per descriptor; ties go to the lowest index."""
    x = np.ascontiguousarray(descriptors, np.float64)
    if x.shape[1] != vocab.centroids.shape[1]:
        raise ValueError(f"descriptor dim {x.shape[1]} != vocabulary dim {vocab.centroids.shape[1]}")
    return kernels.nearest_centroid(x, np.ascontiguousarray(vocab.centroids))


def quantize(descriptors: np.ndarray, vocab: Vocabulary) -> np.ndarray:
    """Term-frequency vector (length k) of a descriptor set."""
    if len(descriptors) == 0:
        return np.zeros(vocab.k, np.int64)
    terms = nearest_terms(descriptors, vocab)
    return np.bincount(terms, minlength=vocab.k)


def tfidf_weights(tf: np.ndarray, idf: np.ndarray) -> np.ndarray:
    """tf-idf weights, L2-normalized, snapped to float32 precision.

    The float32 snap makes in-memory weights identical to what the persisted
    index stores, so save/load is an exact round trip.
    """
    w = tf.astype(np.float64) * idf
    norm = np.linalg.norm(w)
    if norm > 0.0:
        w /= norm
    return w.astype(np.float32).astype(np.float64)


def build_index(histograms: np.ndarray, images: list[tuple[int, int]],
                params: DescriptorParams, manifest_hash: str = "",
                manifest_path: str = "") -> InvertedIndex:
    """tf-idf inverted index over per-image term-frequency histograms.

    idf(t) = ln(N / (1 + df(t))) + 1; per-image weights are L2-normalized;
    postings keep only nonzero weights.
    """
    tf = np.asarray(histograms)
    if tf.ndim != 2 or len(tf) == 0:
        raise ValueError("need a non-empty (N, k) histogram matrix")
    if len(images) != len(tf):
        raise ValueError("image table length must match histogram count")
    if not (tf > 0).any():
        raise ValueError("corpus histograms are all empty")
    n = len(tf)
    df = (tf > 0).sum(axis=0).astype(np.float64)
    idf = np.log(n / (1.0 + df)) + 1.0
    weights = np.stack([tfidf_weights(tf[i], idf) for i in range(n)])
    postings = []
    for t in range(tf.shape[1]):
        ids = np.nonzero(weights[:, t] > 0.0)[0].astype(np.uint32)
        postings.append((ids, weights[ids, t].copy()))
    return InvertedIndex(idf=idf, postings=postings, images=list(images), params=params,
                         manifest_hash=manifest_hash, manifest_path=manifest_path)


def query_weights(sketch: np.ndarray, vocab: Vocabulary, index: InvertedIndex) -> np.ndarray:
    """tf-idf weight vector of a query sketch under an index's idf table."""
    desc = sketch_descriptors(sketch, index.params)
    if len(desc) == 0:
        raise BlankSketchError("sketch produced no usable descriptors")
    return tfidf_weights(quantize(desc, vocab), index.idf)


def score_images(index: InvertedIndex, qw: np.ndarray) -> np.ndarray:
    """Cosine score of the query against every indexed image."""
    scores = np.zeros(index.n_images, np.float64)
    for t in np.nonzero(qw)[0]:
        ids, ws = index.postings[t]
        scores[ids] += qw[t] * ws
    return scores


def query(index: InvertedIndex, vocab: Vocabulary, sketch: np.ndarray,
          topk: int = 10) -> list[RetrievalHit]:
    """Rank models against a query sketch.

    Per-model similarity is the max cosine over its indexed views, clamped
    to [0, 1]; ties order by lower model id.
    """
    qw = query_weights(sketch, vocab, index)
    scores = score_images(index, qw)
    best: dict[int, tuple[float, int]] = {}
    for img_id, (model_id, view_idx) in enumerate(index.images):
        s = scores[img_id]
        cur = best.get(model_id)
        if cur is None or s > cur[0]:
            best[model_id] = (s, view_idx)
    ranked = sorted(best.items(), key=lambda kv: (-kv[1][0], kv[0]))
    hits = [RetrievalHit(model_id=m, view_index=v, similarity=float(min(max(s, 0.0), 1.0)))
            for m, (s, v) in ranked[:topk]]
    return hits


# --- persistence ------------------------------------------------------------
#
# One file: text header (key<TAB>value lines between the magic and an
# "end_header" line, including the image table), then little-endian binary:
# centroids (k*dim f64), idf (k f64), and per-term postings as a u32 count
# followed by count * (u32 image id, f32 weight).


def save_index(index: InvertedIndex, vocab: Vocabulary, path) -> None:
    p = index.params
    lines = [INDEX_MAGIC,
             f"version\t{INDEX_VERSION}",
             f"k\t{index.k}",
             f"dim\t{p.dim}",
             f"patch\t{p.patch}",
             f"tiles\t{p.tiles}",
             f"bins\t{p.bins}",
             f"keypoints\t{p.keypoints}",
             f"seed\t{p.seed}",
             f"images\t{index.n_images}",
             f"manifest_hash\t{index.manifest_hash or '-'}",
             f"manifest_path\t{index.manifest_path or '-'}"]
    for img_id, (model_id, view_idx) in enumerate(index.images):
        lines.append(f"image\t{img_id}\t{model_id}\t{view_idx}")
    lines.append("end_header")
    blob = bytearray(("\n".join(lines) + "\n").encode("utf-8"))
    blob += np.ascontiguousarray(vocab.centroids, "<f8").tobytes()
    blob += np.ascontiguousarray(index.idf, "<f8").tobytes()
    for ids, ws in index.postings:
        blob += struct.pack("<I", len(ids))
        inter = np.empty(len(ids), dtype=[("id", "<u4"), ("w", "<f4")])
        inter["id"] = ids
        inter["w"] = ws
        blob += inter.tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise TruncatedIndexError(f"index file ends inside {what} "
                                  f"(wanted {n} bytes, got {len(data)})")
    return data


def load_index(path) -> tuple[InvertedIndex, Vocabulary]:
    with open(path, "rb") as fh:
        magic = fh.readline().decode("utf-8", "replace").rstrip("\n")
        if magic != INDEX_MAGIC:
            raise BadMagicError(f"bad index magic {magic!r} (expected {INDEX_MAGIC!r})")
        header: dict[str, str] = {}
        images: list[tuple[int, int]] = []
        while True:
            raw = fh.readline()
            if not raw:
                raise TruncatedIndexError("index file ends inside the header")
            line = raw.decode("utf-8").rstrip("\n")
            if line == "end_header":
                break
            key, _, value = line.partition("\t")
            if key == "image":
                img_id, model_id, view_idx = (int(v) for v in value.split("\t"))
                if img_id != len(images):
                    raise TruncatedIndexError("image table ids are not dense")
                images.append((model_id, view_idx))
            else:
                header[key] = value
        version = int(header.get("version", "-1"))
        if version != INDEX_VERSION:
            raise UnknownVersionError(found=version, supported=INDEX_VERSION)
        k = int(header["k"])
        dim = int(header["dim"])
        params = DescriptorParams(patch=int(header["patch"]), tiles=int(header["tiles"]),
                                  bins=int(header["bins"]), keypoints=int(header["keypoints"]),
                                  seed=int(header["seed"]))
        if params.dim != dim:
            raise TruncatedIndexError(f"descriptor dim {dim} inconsistent with parameters")
        if len(images) != int(header["images"]):
            raise TruncatedIndexError("image table shorter than declared")
        centroids = np.frombuffer(_read_exact(fh, 8 * k * dim, "vocabulary"),
                                  "<f8").reshape(k, dim).copy()
        idf = np.frombuffer(_read_exact(fh, 8 * k, "idf table"), "<f8").copy()
        postings = []
        for t in range(k):
            (count,) = struct.unpack("<I", _read_exact(fh, 4, f"posting list {t}"))
            rows = np.frombuffer(_read_exact(fh, 8 * count, f"posting list {t}"),
                                 dtype=[("id", "<u4"), ("w", "<f4")])
            postings.append((rows["id"].astype(np.uint32),
                             rows["w"].astype(np.float64)))
        trailing = fh.read(1)
        if trailing:
            raise TruncatedIndexError("index file has trailing bytes after postings")
    mh = header.get("manifest_hash", "-")
    mp = header.get("manifest_path", "-")
    index = InvertedIndex(idf=idf, postings=postings, images=images, params=params,
                          manifest_hash="" if mh == "-" else mh,
                          manifest_path="" if mp == "-" else mp)
    vocab = Vocabulary(centroids=centroids, seed=params.seed)
    return index, vocab


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
