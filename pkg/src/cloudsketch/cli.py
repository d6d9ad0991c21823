"""Command-line interface.

Every subcommand exits 0 on success; failures print one machine-parseable
line to stderr (`error<TAB>type<TAB>message`) and exit nonzero.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import dataset, imageproc, render, retrieval
from .errors import CloudSketchError
from .geometry import Viewpoint, normalize_unit, sample_surface
from .icp import IcpParams, icp, model_alignment_points, serialize_icp_result
from .meshio import parse_off, parse_pointcloud, sniff_pointcloud_format, write_xyz


def _load_normalized_mesh(path: str):
    mesh = parse_off(Path(path).read_bytes())
    verts, _ = normalize_unit(mesh.vertices)
    return mesh.with_vertices(verts)


def _parse_direction(text: str) -> np.ndarray:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"direction must be x,y,z; got {text!r}")
    return np.asarray(parts)


def cmd_build_dataset(args) -> int:
    manifest = dataset.build_contour_dataset(args.model_dir, args.out,
                                             n_views=args.views, canvas=args.canvas,
                                             threshold=args.threshold,
                                             median_k=args.median_k,
                                             stroke=args.stroke, margin=args.margin)
    print(f"built {len(manifest.entries)} contour images "
          f"({manifest.n_models} models x {manifest.n_views} views) -> {manifest.path}")
    if manifest.rejects:
        print(f"rejected {len(manifest.rejects)} meshes (see manifest)")
    return 0


def cmd_build_index(args) -> int:
    index, _ = dataset.build_search_index(args.manifest, args.out, vocab_k=args.k,
                                          seed=args.seed, keypoints=args.keypoints,
                                          patch=args.patch, iters=args.iters,
                                          train_size=args.train_size)
    print(f"indexed {index.n_images} images with k={index.k} -> {args.out}")
    return 0


def cmd_query(args) -> int:
    index, vocab, _ = dataset.load_search_index(args.index, verify_manifest=not args.no_verify)
    sketch = imageproc.decode_png_sketch(Path(args.sketch).read_bytes())
    hits = retrieval.query(index, vocab, sketch, topk=args.topk)
    for rank, hit in enumerate(hits, start=1):
        print(f"{rank}\t{hit.model_id}\t{hit.view_index}\t{hit.similarity:.6f}")
    return 0


def cmd_align(args) -> int:
    cloud_bytes = Path(args.cloud).read_bytes()
    points = parse_pointcloud(cloud_bytes, sniff_pointcloud_format(cloud_bytes))
    cloud, _ = normalize_unit(points)
    mesh = _load_normalized_mesh(args.model)
    model_pts = model_alignment_points(mesh, seed=args.seed)
    params = IcpParams(n_control=args.n_control, max_iters=args.max_iters,
                       tol=args.tol, seed=args.seed)
    result = icp(model_pts, cloud, params)
    sys.stdout.write(serialize_icp_result(result))
    return 0


def cmd_render(args) -> int:
    mesh = _load_normalized_mesh(args.model)
    vp = Viewpoint(_parse_direction(args.dir))
    mask = render.rasterize_silhouette(mesh, vp, args.size, args.size, margin=args.margin)
    if args.contour:
        out = imageproc.extract_model_contour(imageproc.mask_to_gray(mask),
                                              args.size, args.size)
    else:
        out = mask
    Path(args.out).write_bytes(imageproc.encode_png(out))
    print(f"wrote {args.out}")
    return 0


def cmd_sample_cloud(args) -> int:
    mesh = _load_normalized_mesh(args.model)
    points = sample_surface(mesh, args.points, seed=args.seed)
    text = write_xyz(points)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.points} points -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .session import Engine

    index, vocab, manifest = dataset.load_search_index(args.index)
    engine = Engine(index, vocab, manifest, journal_dir=args.journal_dir)
    app = create_app(engine)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cloudsketch",
                                     description="Sketch-driven 3D model retrieval "
                                                 "and alignment toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dataset", help="render contour images for a mesh corpus")
    p.add_argument("model_dir")
    p.add_argument("--out", default="contour_dataset")
    p.add_argument("--views", type=int, default=102)
    p.add_argument("--canvas", type=int, default=512)
    p.add_argument("--threshold", type=int, default=imageproc.DEFAULT_THRESHOLD)
    p.add_argument("--median-k", type=int, default=imageproc.DEFAULT_MEDIAN_K)
    p.add_argument("--stroke", type=int, default=imageproc.DEFAULT_STROKE)
    p.add_argument("--margin", type=float, default=0.1)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("build-index", help="train a vocabulary and build the search index")
    p.add_argument("manifest")
    p.add_argument("--out", default="index.skbof")
    p.add_argument("--k", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--keypoints", type=int, default=500)
    p.add_argument("--patch", type=int, default=32)
    p.add_argument("--iters", type=int, default=25)
    p.add_argument("--train-size", type=int, default=50000)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("query", help="rank models against a sketch PNG")
    p.add_argument("--index", required=True)
    p.add_argument("--sketch", required=True)
    p.add_argument("--topk", type=int, default=10)
    p.add_argument("--no-verify", action="store_true",
                   help="skip manifest staleness verification")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("align", help="ICP-align a model to a point cloud")
    p.add_argument("--cloud", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-control", type=int, default=2000)
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("render", help="render a model silhouette or contour")
    p.add_argument("--model", required=True)
    p.add_argument("--dir", required=True, help="view direction as x,y,z")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--contour", action="store_true")
    p.add_argument("--out", default="render.png")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("sample-cloud", help="sample a sparse cloud from a mesh surface")
    p.add_argument("--model", required=True)
    p.add_argument("--points", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample_cloud)

    p = sub.add_parser("serve", help="run the session HTTP service")
    p.add_argument("--index", required=True)
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--journal-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CloudSketchError, OSError, ValueError) as exc:
        print(f"error\t{type(exc).__name__}\t{exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
