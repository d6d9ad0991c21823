"""Session state machine driving the interactive modeling loop.

One session walks: load a cloud (or start sketch-only), submit a sketch,
retrieve models, select + align, extract the aligned model's contour for
editing, resubmit, and finally export. The engine is transport-agnostic;
the HTTP layer in `service` is a thin wrapper.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import imageproc, render, retrieval
from .dataset import DatasetManifest
from .errors import CloudSketchError, DegenerateGeometryError, SessionStateError
from .geometry import TriangleMesh, Viewpoint, normalize_unit
from .icp import IcpParams, IcpResult, icp, model_alignment_points
from .meshio import parse_off, parse_pointcloud, sniff_pointcloud_format, write_obj

JOURNAL_ENV = "CLOUDSKETCH_JOURNAL_DIR"

EMPTY = "EMPTY"
CLOUD_LOADED = "CLOUD_LOADED"
RETRIEVED = "RETRIEVED"
ALIGNED = "ALIGNED"
CONTOUR_READY = "CONTOUR_READY"
EXPORTED = "EXPORTED"

STATES = (EMPTY, CLOUD_LOADED, RETRIEVED, ALIGNED, CONTOUR_READY, EXPORTED)


class UnknownSessionError(CloudSketchError):
    pass


class UnknownModelError(CloudSketchError):
    pass


@dataclass
class SessionMetrics:
    sketch_count: int = 0
    retrieval_count: int = 0
    last_similarity: float | None = None
    last_icp_error: float | None = None

    def as_dict(self) -> dict:
        return {"sketch_count": self.sketch_count,
                "retrieval_count": self.retrieval_count,
                "last_similarity": self.last_similarity,
                "last_icp_error": self.last_icp_error}


@dataclass
class Session:
    id: str
    canvas_w: int
    canvas_h: int
    seed: int
    state: str = EMPTY
    cloud: np.ndarray | None = None
    sketch: np.ndarray | None = None
    hits: list[retrieval.RetrievalHit] = field(default_factory=list)
    selected_model: int | None = None
    alignment: IcpResult | None = None
    aligned_mesh: TriangleMesh | None = None
    metrics: SessionMetrics = field(default_factory=SessionMetrics)
    history: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


class Engine:
    """Owns sessions and the shared read-only index/vocabulary/manifest."""

    def __init__(self, index: retrieval.InvertedIndex, vocab: retrieval.Vocabulary,
                 manifest: DatasetManifest | None = None, journal_dir=None):
        self.index = index
        self.vocab = vocab
        self.manifest = manifest
        env_dir = os.environ.get(JOURNAL_ENV, "").strip()
        self.journal_dir = Path(journal_dir) if journal_dir else (Path(env_dir) if env_dir else None)
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._mesh_cache: dict[int, TriangleMesh] = {}

    # -- plumbing ------------------------------------------------------------

    def get(self, session_id: str) -> Session:
        with self._lock:
            try:
                return self.sessions[session_id]
            except KeyError:
                raise UnknownSessionError(f"no session {session_id!r}") from None

    def _record(self, session: Session, step: str, **details) -> None:
        entry = {"step": step, "timestamp": _now(), "metrics": session.metrics.as_dict()}
        session.history.append(entry)
        if self.journal_dir is not None:
            self.journal_dir.mkdir(parents=True, exist_ok=True)
            line = json.dumps({"session": session.id, "step": step,
                               "timestamp": entry["timestamp"], **details},
                              sort_keys=True)
            with open(self.journal_dir / f"{session.id}.jsonl", "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    @staticmethod
    def _require(session: Session, action: str, allowed: tuple[str, ...]) -> None:
        if session.state not in allowed:
            raise SessionStateError(session.state, action)

    def _model_mesh(self, model_id: int) -> TriangleMesh:
        """Normalized mesh for an indexed model (cached)."""
        if self.manifest is None:
            raise CloudSketchError("engine has no manifest; model meshes unavailable")
        if model_id not in self._mesh_cache:
            entry = self.manifest.models().get(model_id)
            if entry is None:
                raise UnknownModelError(f"model {model_id} is not in the dataset")
            mesh = parse_off(self.manifest.resolve(entry.mesh_path).read_bytes())
            verts, _ = normalize_unit(mesh.vertices)
            self._mesh_cache[model_id] = mesh.with_vertices(verts)
        return self._mesh_cache[model_id]

    # -- operations ----------------------------------------------------------

    def create_session(self, canvas_w: int = 512, canvas_h: int = 512, seed: int = 0) -> Session:
        if canvas_w < 16 or canvas_h < 16:
            raise ValueError("canvas must be at least 16x16")
        sid = secrets.token_hex(8)
        session = Session(id=sid, canvas_w=canvas_w, canvas_h=canvas_h, seed=seed)
        with self._lock:
            self.sessions[sid] = session
        self._record(session, "create", canvas=[canvas_w, canvas_h], seed=seed)
        return session

    def load_pointcloud(self, session_id: str, body: bytes, fmt: str | None = None) -> Session:
        session = self.get(session_id)
        with session.lock:
            self._require(session, "load_pointcloud", (EMPTY,))
            fmt = fmt or sniff_pointcloud_format(body)
            points = parse_pointcloud(body, fmt)
            cloud, _ = normalize_unit(points)
            session.cloud = cloud
            session.state = CLOUD_LOADED
            self._record(session, "load_pointcloud", points=len(cloud), format=fmt)
        return session

    def get_view(self, session_id: str, direction, width: int | None = None,
                 height: int | None = None) -> tuple[np.ndarray, bytes]:
        """Project the cloud onto a view; returns (N, 2) coords and a dot-plot PNG."""
        session = self.get(session_id)
        if session.cloud is None:
            raise SessionStateError(session.state, "get_view")
        w = width or session.canvas_w
        h = height or session.canvas_h
        vp = Viewpoint(np.asarray(direction, np.float64))
        coords = render.project_points(session.cloud, vp, w, h)
        img = np.zeros((h, w), bool)
        xs = np.clip(np.rint(coords[:, 0]).astype(int), 0, w - 1)
        ys = np.clip(np.rint(coords[:, 1]).astype(int), 0, h - 1)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                img[np.clip(ys + dy, 0, h - 1), np.clip(xs + dx, 0, w - 1)] = True
        return coords, imageproc.encode_png(img)

    def submit_sketch(self, session_id: str, png: bytes) -> list[retrieval.RetrievalHit]:
        session = self.get(session_id)
        with session.lock:
            self._require(session, "submit_sketch", (EMPTY, CLOUD_LOADED, CONTOUR_READY))
            sketch = imageproc.decode_png_sketch(png)
            hits = retrieval.query(self.index, self.vocab, sketch, topk=10)
            session.sketch = sketch
            session.hits = hits
            session.metrics.sketch_count += 1
            session.metrics.retrieval_count += 1
            session.metrics.last_similarity = hits[0].similarity if hits else None
            session.state = RETRIEVED
            self._record(session, "submit_sketch",
                         hits=[(h.model_id, h.similarity) for h in hits])
        return hits

    def select_and_align(self, session_id: str, model_id: int) -> IcpResult | None:
        session = self.get(session_id)
        with session.lock:
            self._require(session, "select_and_align", (RETRIEVED,))
            if model_id not in {h.model_id for h in session.hits}:
                raise UnknownModelError(f"model {model_id} is not among the current hits")
            mesh = self._model_mesh(model_id)
            session.selected_model = model_id
            if session.cloud is None:
                # sketch-only mode: selection without alignment
                session.alignment = None
                session.aligned_mesh = mesh
            else:
                pts = model_alignment_points(mesh, seed=session.seed)
                result = icp(pts, session.cloud, IcpParams(seed=session.seed))
                session.alignment = result
                session.aligned_mesh = mesh.with_vertices(result.apply(mesh.vertices))
                session.metrics.last_icp_error = result.error
            session.state = ALIGNED
            self._record(session, "select_and_align", model=model_id,
                         error=None if session.alignment is None else session.alignment.error)
        return session.alignment

    def extract_contour(self, session_id: str, direction) -> bytes:
        session = self.get(session_id)
        with session.lock:
            self._require(session, "extract_contour", (ALIGNED,))
            vp = Viewpoint(np.asarray(direction, np.float64))
            mesh = session.aligned_mesh
            silhouette = render.rasterize_silhouette(mesh, vp, session.canvas_w,
                                                     session.canvas_h)
            sketch = imageproc.extract_model_contour(imageproc.mask_to_gray(silhouette),
                                                     session.canvas_w, session.canvas_h)
            session.state = CONTOUR_READY
            self._record(session, "extract_contour",
                         direction=[float(v) for v in vp.direction])
        return imageproc.encode_png(sketch)

    def export_model(self, session_id: str) -> tuple[str, SessionMetrics]:
        session = self.get(session_id)
        with session.lock:
            self._require(session, "export_model", (ALIGNED, CONTOUR_READY))
            obj_text = write_obj(session.aligned_mesh)
            session.state = EXPORTED
            self._record(session, "export_model", vertices=session.aligned_mesh.n_vertices)
        return obj_text, session.metrics
