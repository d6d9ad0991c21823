"""Offline contour-dataset construction and search-index persistence.

A dataset is a directory of contour PNGs plus a line-oriented manifest
(tab-separated, UTF-8, LF; ``#!`` header lines carry the pipeline
parameters). The search index records the manifest's content hash so a
stale index is detected at load time.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import imageproc, render, retrieval
from .errors import CloudSketchError, StaleIndexError
from .geometry import fibonacci_viewpoints, normalize_unit
from .meshio import parse_off

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.tsv"


@dataclass(frozen=True)
class ManifestEntry:
    model_id: int
    category: str
    name: str
    mesh_path: str
    view_index: int
    image_path: str


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    n_views: int
    canvas: int
    threshold: int = imageproc.DEFAULT_THRESHOLD
    median_k: int = imageproc.DEFAULT_MEDIAN_K
    stroke: int = imageproc.DEFAULT_STROKE
    margin: float = 0.1
    rejects: list[tuple[str, str]] = field(default_factory=list)
    path: Path | None = None

    @property
    def n_models(self) -> int:
        return len({e.model_id for e in self.entries})

    def models(self) -> dict[int, ManifestEntry]:
        """One representative entry per model id."""
        out: dict[int, ManifestEntry] = {}
        for e in self.entries:
            out.setdefault(e.model_id, e)
        return out

    def resolve(self, rel: str) -> Path:
        base = self.path.parent if self.path is not None else Path(".")
        return (base / rel).resolve()


def write_manifest(manifest: DatasetManifest, path: Path) -> None:
    lines = [f"#!\tviews\t{manifest.n_views}",
             f"#!\tcanvas\t{manifest.canvas}",
             f"#!\tthreshold\t{manifest.threshold}",
             f"#!\tmedian_k\t{manifest.median_k}",
             f"#!\tstroke\t{manifest.stroke}",
             f"#!\tmargin\t{manifest.margin:.17g}"]
    for rel, reason in manifest.rejects:
        lines.append(f"#!\treject\t{rel}\t{reason}")
    for e in manifest.entries:
        lines.append(f"{e.model_id}\t{e.category}\t{e.name}\t{e.mesh_path}"
                     f"\t{e.view_index}\t{e.image_path}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    manifest.path = path


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    params = {"views": "102", "canvas": "512", "threshold": "128",
              "median_k": "3", "stroke": "1", "margin": "0.1"}
    rejects: list[tuple[str, str]] = []
    entries: list[ManifestEntry] = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        if not raw.strip():
            continue
        cols = raw.split("\t")
        if cols[0].startswith("#") and cols[0] != "#!":
            continue
        if cols[0] == "#!":
            if cols[1] == "reject":
                rejects.append((cols[2], cols[3] if len(cols) > 3 else ""))
            else:
                params[cols[1]] = cols[2]
        else:
            entries.append(ManifestEntry(model_id=int(cols[0]), category=cols[1],
                                         name=cols[2], mesh_path=cols[3],
                                         view_index=int(cols[4]), image_path=cols[5]))
    return DatasetManifest(entries=entries, n_views=int(params["views"]),
                           canvas=int(params["canvas"]), threshold=int(params["threshold"]),
                           median_k=int(params["median_k"]), stroke=int(params["stroke"]),
                           margin=float(params["margin"]), rejects=rejects, path=path)


def discover_meshes(model_dir: Path) -> list[Path]:
    return sorted(p for p in Path(model_dir).rglob("*.off") if p.is_file())


def build_contour_dataset(model_dir, out_dir, n_views: int = 102, canvas: int = 512,
                          threshold: int = imageproc.DEFAULT_THRESHOLD,
                          median_k: int = imageproc.DEFAULT_MEDIAN_K,
                          stroke: int = imageproc.DEFAULT_STROKE,
                          margin: float = 0.1) -> DatasetManifest:
    """Render every model from every lattice viewpoint and extract contours.

    Models are OFF files under `model_dir`; the immediate subdirectory name
    is the category label. Unparseable meshes are skipped with a warning and
    listed in the manifest's rejects. Output (PNGs + manifest.tsv) is
    deterministic for fixed inputs.
    """
    model_dir = Path(model_dir)
    out_dir = Path(out_dir)
    mesh_paths = discover_meshes(model_dir)
    if not mesh_paths:
        raise CloudSketchError(f"no OFF meshes found under {model_dir}")
    images_dir = out_dir / "images"
    images_dir.mkdir(parents=True, exist_ok=True)
    views = fibonacci_viewpoints(n_views)
    entries: list[ManifestEntry] = []
    rejects: list[tuple[str, str]] = []
    model_id = 0
    for mesh_path in mesh_paths:
        rel = mesh_path.relative_to(model_dir)
        category = rel.parts[0] if len(rel.parts) > 1 else "root"
        try:
            mesh = parse_off(mesh_path.read_bytes())
            verts, _ = normalize_unit(mesh.vertices)
            mesh = mesh.with_vertices(verts)
        except CloudSketchError as exc:
            log.warning("skipping unparseable mesh %s: %s", mesh_path, exc)
            rejects.append((rel.as_posix(), str(exc)))
            continue
        mesh_rel = os.path.relpath(mesh_path, out_dir)
        for vp in views:
            silhouette = render.rasterize_silhouette(mesh, vp, canvas, canvas, margin)
            sketch = imageproc.extract_model_contour(imageproc.mask_to_gray(silhouette),
                                                     canvas, canvas, threshold=threshold,
                                                     median_k=median_k, stroke=stroke)
            image_name = f"m{model_id:04d}_v{vp.index:03d}.png"
            (images_dir / image_name).write_bytes(imageproc.encode_png(sketch))
            entries.append(ManifestEntry(model_id=model_id, category=category,
                                         name=mesh_path.stem, mesh_path=mesh_rel,
                                         view_index=vp.index,
                                         image_path=f"images/{image_name}"))
        model_id += 1
    manifest = DatasetManifest(entries=entries, n_views=n_views, canvas=canvas,
                               threshold=threshold, median_k=median_k, stroke=stroke,
                               margin=margin, rejects=rejects)
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest


def build_search_index(manifest: DatasetManifest | str | Path, out_path,
                       vocab_k: int = 256, seed: int = 0, keypoints: int = 500,
                       patch: int = 32, tiles: int = 4, bins: int = 4,
                       iters: int = 25, train_size: int = 50000,
                       ) -> tuple[retrieval.InvertedIndex, retrieval.Vocabulary]:
    """Descriptor sampling, vocabulary training, and index build + save."""
    if not isinstance(manifest, DatasetManifest):
        manifest = load_manifest(manifest)
    if manifest.path is None:
        raise CloudSketchError("manifest must be written to disk before indexing")
    out_path = Path(out_path)
    params = retrieval.DescriptorParams(patch=patch, tiles=tiles, bins=bins,
                                        keypoints=keypoints, seed=seed)
    ordered = sorted(manifest.entries, key=lambda e: (e.model_id, e.view_index))
    per_image: list[np.ndarray] = []
    images: list[tuple[int, int]] = []
    for entry in ordered:
        png = manifest.resolve(entry.image_path).read_bytes()
        sketch = imageproc.decode_png_sketch(png)
        per_image.append(retrieval.sketch_descriptors(sketch, params))
        images.append((entry.model_id, entry.view_index))
    pool = np.concatenate([d for d in per_image if len(d)], axis=0)
    if len(pool) > train_size:
        rng = np.random.default_rng(seed)
        pool = pool[np.sort(rng.choice(len(pool), size=train_size, replace=False))]
    vocab = retrieval.build_vocabulary(pool, k=vocab_k, iters=iters, seed=seed)
    hists = np.stack([retrieval.quantize(d, vocab) for d in per_image])
    index = retrieval.build_index(hists, images, params,
                                  manifest_hash=retrieval.file_sha256(manifest.path),
                                  manifest_path=os.path.relpath(manifest.path, out_path.parent))
    retrieval.save_index(index, vocab, out_path)
    return index, vocab


def load_search_index(path, verify_manifest: bool = True,
                      ) -> tuple[retrieval.InvertedIndex, retrieval.Vocabulary,
                                 DatasetManifest | None]:
    """Load a persisted index; verify the recorded manifest hash when present."""
    path = Path(path)
    index, vocab = retrieval.load_index(path)
    manifest = None
    if index.manifest_path:
        mpath = (path.parent / index.manifest_path).resolve()
        if mpath.exists():
            if verify_manifest and index.manifest_hash:
                actual = retrieval.file_sha256(mpath)
                if actual != index.manifest_hash:
                    raise StaleIndexError(
                        f"manifest {mpath} hash {actual[:12]} does not match the hash "
                        f"recorded at index build time ({index.manifest_hash[:12]})")
            manifest = load_manifest(mpath)
    return index, vocab, manifest
