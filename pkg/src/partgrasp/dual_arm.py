"""Dual-arm coordination: per-arm constrained sampling, energy filtering,
inter-gripper collision, force-closure validation, maximal-distance selection.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .collision import extract_contacts, gripper_gripper_collision
from .energy import EnergyField, GripperModel
from .errors import NoFeasiblePairError
from .force_closure import force_closure_epsilon
from .pointcloud import PointCloud, knn
from .sampler import GraspCandidate, SamplerConfig, sample_grasps
from .scene import SceneDescription, baseline_fps_knn_regions, determine_target_regions


@dataclass(frozen=True)
class GraspPair:
    """A grasp per arm, their center distance and pooled force-closure quality."""

    h1: GraspCandidate
    h2: GraspCandidate
    center_distance: float
    fc_epsilon: float

    def __post_init__(self):
        if self.fc_epsilon < 0:
            raise ValueError("fc_epsilon must be non-negative")


@dataclass(frozen=True)
class StageCounts:
    """Survivor counts after each pipeline stage."""

    n_filter1: int
    n_filter2: int
    n_nocollide: int
    n_stable: int

    @property
    def n_pairs(self) -> int:
        return self.n_filter1 * self.n_filter2

    def as_list(self) -> list[int]:
        return [self.n_filter1, self.n_filter2, self.n_nocollide, self.n_stable]


@dataclass(frozen=True)
class DualArmThresholds:
    delta: float | None = None  # None: percentile of the pooled e_global values
    delta_percentile: float = 60.0
    fc_threshold: float = 1e-3
    mu: float = 0.5
    cone_edges: int = 8
    project_centers: bool = False  # measure D between nearest cloud points


@dataclass(frozen=True)
class DualArmPlan:
    pair: GraspPair
    survivors: StageCounts
    region1: PointCloud
    region2: PointCloud
    delta: float


def filter_candidates(cands: list[GraspCandidate], delta: float) -> list[GraspCandidate]:
    """Keep candidates with both energies strictly below delta, order preserved."""
    return [c for c in cands if c.e_global < delta and c.e_part < delta]


def _grasp_center(c: GraspCandidate, cloud: PointCloud, project: bool) -> np.ndarray:
    center = c.pose.translation
    if project:
        center = cloud.points[knn(cloud, center, 1)[0]]
    return center


def select_pair(
    filt1: list[GraspCandidate],
    filt2: list[GraspCandidate],
    cloud: PointCloud,
    gripper: GripperModel,
    fc_threshold: float,
    mu: float,
    cone_edges: int = 8,
    project_centers: bool = False,
) -> tuple[GraspPair, StageCounts]:
    """Collision- and stability-filter all pairs, then pick the widest one.

    Ties on distance break toward higher fc_epsilon, then lexicographic
    candidate indices. Raises NoFeasiblePairError when nothing survives,
    carrying the per-stage survivor counts.
    """
    n1, n2 = len(filt1), len(filt2)
    if n1 == 0 or n2 == 0:
        raise NoFeasiblePairError(n1, n2, 0, 0)

    no_collide = [
        (i, j)
        for i in range(n1)
        for j in range(n2)
        if not gripper_gripper_collision(filt1[i].pose, filt2[j].pose, gripper)
    ]
    if not no_collide:
        raise NoFeasiblePairError(n1, n2, 0, 0)

    contacts1 = [extract_contacts(c.pose, cloud, gripper, arm="arm1") for c in filt1]
    contacts2 = [extract_contacts(c.pose, cloud, gripper, arm="arm2") for c in filt2]
    stable = []
    for i, j in no_collide:
        pooled = contacts1[i] + contacts2[j]
        eps = force_closure_epsilon(pooled, mu, cone_edges) if len(pooled) >= 2 else 0.0
        if eps >= fc_threshold:
            stable.append((i, j, eps))
    counts = StageCounts(n1, n2, len(no_collide), len(stable))
    if not stable:
        raise NoFeasiblePairError(*counts.as_list())

    def rank(entry):
        i, j, eps = entry
        d = float(
            np.linalg.norm(
                _grasp_center(filt1[i], cloud, project_centers)
                - _grasp_center(filt2[j], cloud, project_centers)
            )
        )
        return (d, eps, -i, -j)

    best_i, best_j, best_eps = max(stable, key=rank)
    best_d = rank((best_i, best_j, best_eps))[0]
    return GraspPair(filt1[best_i], filt2[best_j], best_d, best_eps), counts


def arm_seed(seed: int, arm_index: int) -> int:
    """Deterministic per-arm seed derived from (seed, arm index)."""
    return int(np.random.SeedSequence([seed, arm_index]).generate_state(1)[0])


def resolve_delta(
    cands1: list[GraspCandidate], cands2: list[GraspCandidate], thresholds: DualArmThresholds
) -> float:
    if thresholds.delta is not None:
        return thresholds.delta
    pooled = np.array([c.e_global for c in cands1 + cands2])
    return float(np.percentile(pooled, thresholds.delta_percentile))


def _plan_regions(
    global_cloud: PointCloud,
    region1: PointCloud,
    region2: PointCloud,
    field: EnergyField,
    cfg: SamplerConfig,
    thresholds: DualArmThresholds,
    gripper: GripperModel,
) -> DualArmPlan:
    cfg1 = replace(cfg, seed=arm_seed(cfg.seed, 1))
    cfg2 = replace(cfg, seed=arm_seed(cfg.seed, 2))
    cands1 = sample_grasps(global_cloud, region1, field, cfg1, arm="arm1")
    cands2 = sample_grasps(global_cloud, region2, field, cfg2, arm="arm2")
    delta = resolve_delta(cands1, cands2, thresholds)
    filt1 = filter_candidates(cands1, delta)
    filt2 = filter_candidates(cands2, delta)
    pair, counts = select_pair(
        filt1,
        filt2,
        global_cloud,
        gripper,
        thresholds.fc_threshold,
        thresholds.mu,
        thresholds.cone_edges,
        thresholds.project_centers,
    )
    return DualArmPlan(pair, counts, region1, region2, delta)


def plan_dual(
    scene: SceneDescription,
    part_label: str,
    field: EnergyField,
    cfg: SamplerConfig,
    thresholds: DualArmThresholds | None = None,
    gripper: GripperModel | None = None,
) -> DualArmPlan:
    """Full dual-arm pipeline on semantically or geometrically split regions."""
    thresholds = thresholds or DualArmThresholds()
    if gripper is None:
        gripper = getattr(field, "gripper", None) or GripperModel()
    region1, region2 = determine_target_regions(scene, part_label)
    return _plan_regions(scene.cloud, region1, region2, field, cfg, thresholds, gripper)


def plan_dual_baseline(
    scene: SceneDescription,
    knn_k: int,
    field: EnergyField,
    cfg: SamplerConfig,
    thresholds: DualArmThresholds | None = None,
    gripper: GripperModel | None = None,
) -> DualArmPlan:
    """Same pipeline but regions come from the FPS+KNN baseline generator."""
    thresholds = thresholds or DualArmThresholds()
    if gripper is None:
        gripper = getattr(field, "gripper", None) or GripperModel()
    region1, region2 = baseline_fps_knn_regions(scene.cloud, knn_k, cfg.seed)
    return _plan_regions(scene.cloud, region1, region2, field, cfg, thresholds, gripper)
