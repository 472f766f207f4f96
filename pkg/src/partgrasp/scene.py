"""Scene descriptions and target-region definition.

A scene file is the stand-in for the perception front-end: it names the
object, points at a PLY cloud, and lists per-part index sets. Region
definition supports semantic splitting (two named sub-parts), geometric
splitting (PCA half-spaces), and the FPS+KNN baseline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    EmptyPartError,
    PartIndexError,
    PartOverlapError,
    RegionTooSmallError,
    SceneCloudMissingError,
    SceneParseError,
    UnknownPartError,
)
from .pointcloud import PointCloud, farthest_point_sample, knn, load_ply, pca_major_axis

# Mode "auto" resolves to dual when the bounding box is longer than this (m).
DUAL_SPAN_THRESHOLD = 0.45

# A single matched part larger than this is split itself instead of the
# whole object.
_LARGE_PART_POINTS = 50

MODES = ("single", "dual", "auto")


@dataclass(frozen=True)
class SceneDescription:
    """Object cloud plus named part index sets and a mode hint."""

    object_label: str
    cloud: PointCloud
    parts: dict[str, np.ndarray] = field(default_factory=dict)
    mode_hint: str = "auto"
    allow_overlapping_parts: bool = False

    def __post_init__(self):
        if self.mode_hint not in MODES:
            raise SceneParseError(f"mode_hint must be one of {MODES}, got {self.mode_hint!r}")
        n = len(self.cloud)
        clean: dict[str, np.ndarray] = {}
        for label, idx in self.parts.items():
            arr = np.asarray(idx, dtype=int)
            if arr.size == 0:
                raise EmptyPartError(f"part {label!r} has no points")
            if arr.min() < 0 or arr.max() >= n:
                raise PartIndexError(f"part {label!r} references index outside cloud of {n} points")
            arr = np.unique(arr)
            arr.setflags(write=False)
            clean[label] = arr
        if not self.allow_overlapping_parts:
            seen: dict[int, str] = {}
            for label, arr in clean.items():
                for i in arr:
                    if int(i) in seen:
                        raise PartOverlapError(
                            f"parts {seen[int(i)]!r} and {label!r} share point {int(i)}"
                        )
                    seen[int(i)] = label
        object.__setattr__(self, "parts", clean)

    def part_cloud(self, label: str) -> PointCloud:
        if label not in self.parts:
            raise UnknownPartError(f"unknown part {label!r}")
        return self.cloud.select(self.parts[label])

    def matching_parts(self, label_prefix: str) -> list[str]:
        """Part labels equal to or starting with the prefix, sorted."""
        if label_prefix == "*":
            return []
        return sorted(l for l in self.parts if l == label_prefix or l.startswith(label_prefix))


@dataclass(frozen=True)
class GroundingResult:
    """Global cloud P, target sub-cloud P_t, and the resolved mode."""

    global_cloud: PointCloud
    target: PointCloud
    mode: str


def load_scene(path) -> SceneDescription:
    """Load and fully validate a scene JSON file.

    Schema: object_label (str), cloud_ply (path relative to the scene file),
    parts (label -> index array), mode_hint ("single"|"dual"|"auto",
    default auto), allow_overlapping_parts (bool, default false).
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise SceneParseError(f"scene file not found: {path}")
    except json.JSONDecodeError as e:
        raise SceneParseError(f"{path}: invalid JSON: {e}")
    if not isinstance(raw, dict):
        raise SceneParseError(f"{path}: top level must be an object")
    for key in ("object_label", "cloud_ply", "parts"):
        if key not in raw:
            raise SceneParseError(f"{path}: missing field {key!r}")
    if not isinstance(raw["parts"], dict):
        raise SceneParseError(f"{path}: parts must be an object")
    ply_path = path.parent / raw["cloud_ply"]
    if not ply_path.exists():
        raise SceneCloudMissingError(f"cloud PLY not found: {ply_path}")
    try:
        cloud = load_ply(ply_path)
    except ValueError as e:
        raise SceneParseError(str(e))
    return SceneDescription(
        object_label=str(raw["object_label"]),
        cloud=cloud,
        parts=raw["parts"],
        mode_hint=raw.get("mode_hint", "auto"),
        allow_overlapping_parts=bool(raw.get("allow_overlapping_parts", False)),
    )


def save_scene(scene: SceneDescription, path, cloud_ply_name: str) -> None:
    """Write the scene JSON referencing an already-saved PLY."""
    doc = {
        "object_label": scene.object_label,
        "cloud_ply": cloud_ply_name,
        "parts": {label: [int(i) for i in idx] for label, idx in sorted(scene.parts.items())},
        "mode_hint": scene.mode_hint,
    }
    if scene.allow_overlapping_parts:
        doc["allow_overlapping_parts"] = True
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def ground_target(scene: SceneDescription, part_label: str) -> GroundingResult:
    """Resolve a part label into (P, P_t, mode).

    "*" targets the whole object. Mode "auto" resolves to dual when two
    parts match the label prefix or the bounding box is longer than
    DUAL_SPAN_THRESHOLD.
    """
    if part_label == "*":
        target = scene.cloud
    elif part_label in scene.parts:
        target = scene.part_cloud(part_label)
    else:
        matches = scene.matching_parts(part_label)
        if not matches:
            raise UnknownPartError(f"unknown part {part_label!r}")
        target = scene.cloud.select(np.concatenate([scene.parts[m] for m in matches]))
    mode = scene.mode_hint
    if mode == "auto":
        two_parts = len(scene.matching_parts(part_label)) == 2
        long_object = float(scene.cloud.bbox_extent().max()) > DUAL_SPAN_THRESHOLD
        mode = "dual" if (two_parts or long_object) else "single"
    return GroundingResult(scene.cloud, target, mode)


def geometric_split(cloud: PointCloud) -> tuple[PointCloud, PointCloud]:
    """Partition by the plane through the centroid normal to the PCA axis.

    Points exactly on the plane go to the first region. Falls back to an
    x-axis split when the PCA is degenerate.
    """
    if len(cloud) < 4:
        raise ValueError("need at least 4 points to split")
    try:
        axis = pca_major_axis(cloud)
    except Exception:
        axis = np.array([1.0, 0.0, 0.0])
    proj = (cloud.points - cloud.centroid()) @ axis
    first = np.flatnonzero(proj <= 0.0)
    second = np.flatnonzero(proj > 0.0)
    if len(first) < 2 or len(second) < 2:
        raise RegionTooSmallError("split produced a region with fewer than 2 points")
    return cloud.select(first), cloud.select(second)


def determine_target_regions(
    scene: SceneDescription, part_label: str
) -> tuple[PointCloud, PointCloud]:
    """Two target regions for dual-arm planning.

    Exactly two disjoint parts matching the label prefix give a semantic
    split; otherwise the object (or the single matched part when it is
    large) is split geometrically. The first region is the one whose
    centroid sits lower along the reference axis.
    """
    matches = scene.matching_parts(part_label)
    if len(matches) == 2:
        a = scene.part_cloud(matches[0])
        b = scene.part_cloud(matches[1])
        if len(a) < 2 or len(b) < 2:
            raise RegionTooSmallError("semantic region has fewer than 2 points")
        axis = _reference_axis(scene.cloud)
        if float(a.centroid() @ axis) > float(b.centroid() @ axis):
            a, b = b, a
        return a, b
    if len(matches) == 1 and len(scene.parts[matches[0]]) > _LARGE_PART_POINTS:
        return geometric_split(scene.part_cloud(matches[0]))
    return geometric_split(scene.cloud)


def _reference_axis(cloud: PointCloud) -> np.ndarray:
    try:
        return pca_major_axis(cloud)
    except Exception:
        return np.array([1.0, 0.0, 0.0])


def baseline_fps_knn_regions(
    cloud: PointCloud, k: int, seed: int
) -> tuple[PointCloud, PointCloud]:
    """Baseline region pair: FPS picks two seed points, KNN grows each region."""
    if k > len(cloud) // 2:
        raise ValueError(f"k={k} too large for cloud of {len(cloud)} points")
    s1, s2 = farthest_point_sample(cloud, 2, seed)
    r1 = knn(cloud, cloud.points[s1], k)
    r2 = knn(cloud, cloud.points[s2], k)
    return cloud.select(r1), cloud.select(r2)
