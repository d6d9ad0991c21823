"""Rigid alignment of a retrieved model to a point cloud.

Point-to-point ICP: control points are drawn once from the cloud, matched to
their nearest model points each iteration (kd-tree), and a closed-form SVD
rigid fit is applied until the RMS error change drops below tolerance. A
one-shot uniform prescale (AABB-diagonal ratio) precedes the rigid loop so
models of arbitrary units can converge onto unit-normalized clouds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateFitError, DegenerateGeometryError
from .geometry import RigidTransform, TriangleMesh, aabb_diagonal, sample_surface


PRESCALE_DEADBAND = 1.5


@dataclass(frozen=True)
class IcpParams:
    n_control: int = 2000
    max_iters: int = 50
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.n_control < 3:
            raise ValueError("need at least 3 control points")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0.0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class CorrespondenceSet:
    """Per-control nearest model point with its Euclidean distance."""

    control_points: np.ndarray  # (N, 3)
    model_points: np.ndarray    # (N, 3)
    model_indices: np.ndarray   # (N,)
    distances: np.ndarray       # (N,)


@dataclass(frozen=True)
class IcpResult:
    """Alignment mapping model coordinates into the cloud frame.

    A model point p maps to prescale * (rotation @ p) + translation; the
    prescale records the uniform scale matching the model's extent to the
    cloud, so the transform itself stays rigid.
    """

    transform: RigidTransform
    error: float
    iterations: int
    converged: bool
    prescale: float
    error_history: tuple[float, ...] = ()

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, np.float64)
        return self.prescale * (pts @ self.transform.rotation.T) + self.transform.translation


def select_control_points(cloud: np.ndarray, n: int, seed: int = 0) -> np.ndarray:
    """n distinct cloud points, uniform without replacement (all if n >= size)."""
    pts = np.asarray(cloud, np.float64)
    if len(pts) == 0:
        raise DegenerateGeometryError("cannot select control points from an empty cloud")
    if len(pts) <= n:
        return pts.copy()
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(pts), size=n, replace=False))
    return pts[idx]


def nearest_neighbor_pairs(controls: np.ndarray, model_pts: np.ndarray) -> CorrespondenceSet:
    """Exact nearest model point per control; ties go to the lowest index.

    kd-tree accelerated; candidates within a hair of the reported nearest
    distance are re-checked so the result matches a linear scan even under
    exact distance ties.
    """
    c = np.asarray(controls, np.float64)
    m = np.asarray(model_pts, np.float64)
    if len(c) == 0 or len(m) == 0:
        raise DegenerateGeometryError("nearest-neighbor search needs non-empty inputs")
    tree = cKDTree(m)
    d_kd, idx = tree.query(c, k=1)
    radii = d_kd * (1.0 + 1e-9) + 1e-300
    groups = tree.query_ball_point(c, radii)
    out_idx = np.asarray(idx, np.int64)
    for i, cand in enumerate(groups):
        if len(cand) > 1:
            cand = np.sort(np.asarray(cand, np.int64))
            d2 = ((m[cand] - c[i]) ** 2).sum(axis=1)
            out_idx[i] = cand[int(np.argmin(d2))]
    dists = np.sqrt(((m[out_idx] - c) ** 2).sum(axis=1))
    return CorrespondenceSet(control_points=c, model_points=m[out_idx],
                             model_indices=out_idx, distances=dists)


def rigid_fit(source: np.ndarray, target: np.ndarray) -> RigidTransform:
    """Least-squares rigid transform mapping source onto target (Kabsch).

    Guarantees det(R) = +1; raises DegenerateFitError for < 3 pairs or
    collinear/coincident configurations.
    """
    p = np.asarray(source, np.float64)
    q = np.asarray(target, np.float64)
    if p.shape != q.shape or p.ndim != 2 or p.shape[1] != 3:
        raise ValueError("source and target must both be (N, 3)")
    if len(p) < 3:
        raise DegenerateFitError(f"rigid fit needs >= 3 pairs, got {len(p)}")
    p_bar = p.mean(axis=0)
    q_bar = q.mean(axis=0)
    h = (p - p_bar).T @ (q - q_bar)
    u, s, vt = np.linalg.svd(h)
    if s[0] <= 0.0 or s[1] <= 1e-12 * s[0]:
        raise DegenerateFitError("correspondences are collinear or coincident; rotation underdetermined")
    d = np.sign(np.linalg.det(vt.T @ u.T))
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    t = q_bar - r @ p_bar
    return RigidTransform(rotation=r, translation=t)


def prescale_model(model_pts: np.ndarray, cloud: np.ndarray) -> float:
    """Uniform scale matching the model's AABB diagonal to the cloud's."""
    model_diag = aabb_diagonal(model_pts)
    if model_diag <= 0.0:
        raise DegenerateGeometryError("model has zero extent; cannot prescale")
    return aabb_diagonal(cloud) / model_diag


def apply_prescale(points: np.ndarray, scale: float) -> np.ndarray:
    """Scale points about their centroid."""
    pts = np.asarray(points, np.float64)
    centroid = pts.mean(axis=0)
    return centroid + (pts - centroid) * scale


def model_alignment_points(mesh: TriangleMesh, seed: int = 0, target: int = 2000) -> np.ndarray:
    """Points representing a mesh for ICP: its vertices when dense enough,
    otherwise area-weighted surface samples."""
    if mesh.n_vertices >= 1000:
        return mesh.vertices.copy()
    return sample_surface(mesh, target, seed)


def _rms(diffs: np.ndarray) -> float:
    return float(np.sqrt((diffs ** 2).sum(axis=1).mean()))


def icp(model_pts: np.ndarray, cloud: np.ndarray, params: IcpParams = IcpParams()) -> IcpResult:
    """Align model points to a cloud; returns the composed transform and error.

    The error is the RMS distance from the cloud's control points to their
    nearest model points; its per-iteration history is kept on the result
    (point-to-point ICP makes it non-increasing).
    """
    model = np.asarray(model_pts, np.float64)
    target = np.asarray(cloud, np.float64)
    if len(model) == 0 or len(target) == 0:
        raise DegenerateGeometryError("icp needs non-empty model and cloud")

    scale = prescale_model(model, target)
    # AABB diagonals are pose-sensitive (a rotated box's grows up to ~25%),
    # so a near-1 ratio is pose jitter, not a unit gap; forcing it onto a
    # rigid alignment would inject an unremovable scale error.
    if 1.0 / PRESCALE_DEADBAND <= scale <= PRESCALE_DEADBAND:
        scale = 1.0
    model_centroid = model.mean(axis=0)
    m0 = model_centroid + (model - model_centroid) * scale
    t0 = RigidTransform(np.eye(3), target.mean(axis=0) - model_centroid)
    controls = select_control_points(target, params.n_control, params.seed)
    tree = cKDTree(m0)

    transform = t0
    errors: list[float] = []
    converged = False
    iterations = 0
    pending_fit = False
    for it in range(params.max_iters):
        iterations = it + 1
        local = transform.inverse().apply(controls)
        _, idx = tree.query(local, k=1)
        matched = transform.apply(m0[idx])
        err = _rms(controls - matched)
        errors.append(err)
        pending_fit = False
        if it > 0 and abs(errors[-2] - err) < params.tol:
            converged = True
            break
        try:
            step = rigid_fit(matched, controls)
        except DegenerateFitError:
            break
        transform = step.compose(transform)
        pending_fit = True

    if pending_fit:
        local = transform.inverse().apply(controls)
        _, idx = tree.query(local, k=1)
        errors.append(_rms(controls - transform.apply(m0[idx])))

    # fold the about-centroid prescale into the returned transform:
    # T(c + s*(v - c)) == s*(R v) + (R (1 - s) c + t)
    r = transform.rotation
    t_out = r @ ((1.0 - scale) * model_centroid) + transform.translation
    return IcpResult(transform=RigidTransform(r, t_out), error=errors[-1],
                     iterations=iterations, converged=converged, prescale=scale,
                     error_history=tuple(errors))


def serialize_icp_result(result: IcpResult) -> str:
    """Fixed-order structured-text record with 17 significant digits."""
    r = result.transform.rotation.reshape(-1)
    t = result.transform.translation
    lines = ["rotation " + " ".join(f"{v:.17g}" for v in r),
             "translation " + " ".join(f"{v:.17g}" for v in t),
             f"prescale {result.prescale:.17g}",
             f"error {result.error:.17g}",
             f"iterations {result.iterations}",
             f"converged {'true' if result.converged else 'false'}"]
    return "\n".join(lines) + "\n"


def parse_icp_result(text: str) -> IcpResult:
    fields: dict[str, list[str]] = {}
    for line in text.splitlines():
        if line.strip():
            parts = line.split()
            fields[parts[0]] = parts[1:]
    rotation = np.asarray([float(v) for v in fields["rotation"]], np.float64).reshape(3, 3)
    translation = np.asarray([float(v) for v in fields["translation"]], np.float64)
    return IcpResult(transform=RigidTransform(rotation, translation),
                     error=float(fields["error"][0]),
                     iterations=int(fields["iterations"][0]),
                     converged=fields["converged"][0] == "true",
                     prescale=float(fields["prescale"][0]))
