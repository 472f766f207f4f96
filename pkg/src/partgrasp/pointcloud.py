"""Point-cloud container and primitives: FPS, KNN, PCA axis, normal estimation.

Clouds are immutable. All operations are pure and deterministic under a
fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateCloudError
from .se3 import Pose

# Brute-force KNN below this size; grid index above.
_KNN_BRUTE_LIMIT = 5000


@dataclass(frozen=True)
class PointCloud:
    """Ordered 3D points in meters, with optional unit normals."""

    points: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (N, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain NaN/Inf")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = np.asarray(self.normals, dtype=float)
            if nrm.shape != pts.shape:
                raise ValueError("normals must match points shape")
            if not np.all(np.isfinite(nrm)):
                raise ValueError("normals contain NaN/Inf")
            lens = np.linalg.norm(nrm, axis=1)
            if np.any(np.abs(lens - 1.0) > 1e-6):
                raise ValueError("normals must be unit length to 1e-6")
            nrm = nrm.copy()
            nrm.setflags(write=False)
            object.__setattr__(self, "normals", nrm)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def has_normals(self) -> bool:
        return self.normals is not None

    def select(self, indices) -> "PointCloud":
        idx = np.asarray(indices, dtype=int)
        nrm = self.normals[idx] if self.normals is not None else None
        return PointCloud(self.points[idx], nrm)

    def transformed(self, pose: Pose) -> "PointCloud":
        pts = pose.apply_points(self.points)
        nrm = pose.rotate_vectors(self.normals) if self.normals is not None else None
        return PointCloud(pts, nrm)

    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def bounding_radius(self) -> float:
        return float(np.linalg.norm(self.points - self.centroid(), axis=1).max())

    def bbox_extent(self) -> np.ndarray:
        return self.points.max(axis=0) - self.points.min(axis=0)


def farthest_point_sample(cloud: PointCloud, m: int, seed: int) -> list[int]:
    """m indices: seeded uniform start, then greedy max-min-distance picks."""
    n = len(cloud)
    if not 1 <= m <= n:
        raise ValueError(f"m={m} out of range for cloud of {n} points")
    rng = np.random.default_rng(seed)
    first = int(rng.integers(0, n))
    chosen = [first]
    dist = np.linalg.norm(cloud.points - cloud.points[first], axis=1)
    for _ in range(m - 1):
        nxt = int(np.argmax(dist))  # argmax takes the lowest index on ties
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(cloud.points - cloud.points[nxt], axis=1))
    return chosen


def knn(cloud: PointCloud, query, k: int) -> list[int]:
    """k indices sorted by ascending distance to query; ties go to lower index."""
    n = len(cloud)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for cloud of {n} points")
    q = np.asarray(query, dtype=float)
    if n <= _KNN_BRUTE_LIMIT:
        cand = np.arange(n)
        d = np.linalg.norm(cloud.points - q, axis=1)
    else:
        cand = _grid_candidates(cloud.points, q, k)
        d = np.linalg.norm(cloud.points[cand] - q, axis=1)
    order = np.lexsort((cand, d))  # distance first, index breaks ties
    return [int(cand[i]) for i in order[:k]]


def _grid_candidates(pts: np.ndarray, q: np.ndarray, k: int) -> np.ndarray:
    """Indices guaranteed to contain the exact k nearest, via voxel shells."""
    lo = pts.min(axis=0)
    span = pts.max(axis=0) - lo
    # Cell size targeting ~4 points per cell on average.
    vol = max(float(np.prod(np.maximum(span, 1e-9))), 1e-27)
    cell = max((4.0 * vol / len(pts)) ** (1.0 / 3.0), 1e-9)
    keys = np.floor((pts - lo) / cell).astype(np.int64)
    buckets: dict[tuple, list[int]] = {}
    for i, key in enumerate(map(tuple, keys)):
        buckets.setdefault(key, []).append(i)
    qc = np.floor((q - lo) / cell).astype(np.int64)

    gathered: list[int] = []
    radius = 0
    while True:
        ring = _shell_cells(qc, radius)
        for key in ring:
            gathered.extend(buckets.get(key, ()))
        if len(gathered) >= k:
            # One extra shell: the k-th neighbor may sit just beyond the
            # current shell boundary.
            for key in _shell_cells(qc, radius + 1):
                gathered.extend(buckets.get(key, ()))
            return np.array(sorted(gathered), dtype=int)
        radius += 1
        if radius > 1 + int(np.max(np.abs(keys - qc))):
            return np.arange(len(pts))


def _shell_cells(center: np.ndarray, r: int) -> list[tuple]:
    if r == 0:
        return [tuple(center)]
    cells = []
    rng = range(-r, r + 1)
    for dx in rng:
        for dy in rng:
            for dz in rng:
                if max(abs(dx), abs(dy), abs(dz)) == r:
                    cells.append((center[0] + dx, center[1] + dy, center[2] + dz))
    return cells


def pca_major_axis(cloud: PointCloud) -> np.ndarray:
    """Unit eigenvector of the covariance with the largest eigenvalue.

    Sign is fixed so the largest-magnitude component is positive.
    """
    if len(cloud) < 2:
        raise ValueError("need at least 2 points")
    centered = cloud.points - cloud.centroid()
    cov = centered.T @ centered / len(cloud)
    if np.abs(cov).max() < 1e-18:
        raise DegenerateCloudError("zero covariance cloud")
    evals, evecs = np.linalg.eigh(cov)
    axis = evecs[:, int(np.argmax(evals))]
    if axis[int(np.argmax(np.abs(axis)))] < 0:
        axis = -axis
    return axis / np.linalg.norm(axis)


def estimate_normals(cloud: PointCloud, k: int) -> PointCloud:
    """Per-point normals from local k-NN covariance, oriented away from centroid."""
    if k < 3:
        raise ValueError("k must be >= 3")
    n = len(cloud)
    k = min(k, n)
    center = cloud.centroid()
    normals = np.empty((n, 3))
    for i in range(n):
        nb = knn(cloud, cloud.points[i], k)
        local = cloud.points[nb] - cloud.points[nb].mean(axis=0)
        cov = local.T @ local / len(nb)
        evals, evecs = np.linalg.eigh(cov)
        normal = evecs[:, 0]
        radial = cloud.points[i] - center
        if np.abs(cov).max() < 1e-18:
            normal = radial  # degenerate neighborhood: fall back to radial
        if np.linalg.norm(normal) < 1e-12:
            normal = np.array([0.0, 0.0, 1.0])
        if np.dot(normal, radial) < 0:
            normal = -normal
        normals[i] = normal / np.linalg.norm(normal)
    return PointCloud(cloud.points, normals)


def load_ply(path) -> PointCloud:
    """Read an ASCII PLY with x,y,z and optional nx,ny,nz vertex properties."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ValueError(f"{path}: not a PLY file")
    n_vertex = None
    props: list[str] = []
    in_vertex_element = False
    body_start = None
    for li, line in enumerate(lines[1:], start=1):
        tok = line.split()
        if not tok or tok[0] == "comment":
            continue
        if tok[0] == "format":
            if tok[1] != "ascii":
                raise ValueError(f"{path}: only ASCII PLY supported")
        elif tok[0] == "element":
            in_vertex_element = tok[1] == "vertex"
            if in_vertex_element:
                n_vertex = int(tok[2])
        elif tok[0] == "property" and in_vertex_element:
            props.append(tok[-1])
        elif tok[0] == "end_header":
            body_start = li + 1
            break
    if n_vertex is None or body_start is None:
        raise ValueError(f"{path}: malformed PLY header")
    for name in ("x", "y", "z"):
        if name not in props:
            raise ValueError(f"{path}: vertex element lacks property {name}")
    has_normals = all(p in props for p in ("nx", "ny", "nz"))

    rows = []
    for line in lines[body_start : body_start + n_vertex]:
        vals = line.split()
        if len(vals) < len(props):
            raise ValueError(f"{path}: truncated vertex row")
        rows.append([float(v) for v in vals[: len(props)]])
    if len(rows) != n_vertex:
        raise ValueError(f"{path}: expected {n_vertex} vertices, got {len(rows)}")
    data = np.array(rows) if rows else np.zeros((0, len(props)))
    col = {name: i for i, name in enumerate(props)}
    pts = data[:, [col["x"], col["y"], col["z"]]]
    nrm = None
    if has_normals and len(rows):
        nrm = data[:, [col["nx"], col["ny"], col["nz"]]]
        lens = np.linalg.norm(nrm, axis=1, keepdims=True)
        nrm = nrm / np.maximum(lens, 1e-12)
    return PointCloud(pts, nrm)


def save_ply(cloud: PointCloud, path) -> None:
    """Write the same ASCII PLY dialect load_ply reads."""
    lines = ["ply", "format ascii 1.0", f"element vertex {len(cloud)}"]
    lines += ["property float x", "property float y", "property float z"]
    if cloud.has_normals:
        lines += ["property float nx", "property float ny", "property float nz"]
    lines.append("end_header")
    for i in range(len(cloud)):
        row = [repr(float(v)) for v in cloud.points[i]]
        if cloud.has_normals:
            row += [repr(float(v)) for v in cloud.normals[i]]
        lines.append(" ".join(row))
    Path(path).write_text("\n".join(lines) + "\n")
