"""Single-arm planning: sample part-guided candidates, pick minimum global energy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collision import gripper_object_collision
from .energy import EnergyField, GripperModel
from .pointcloud import PointCloud
from .sampler import GraspCandidate, SamplerConfig, sample_grasps


@dataclass(frozen=True)
class SingleArmPlan:
    grasp: GraspCandidate
    collision_free: bool
    collision_count: int
    candidates: tuple[GraspCandidate, ...]


def select_minimum_energy(cands: list[GraspCandidate]) -> GraspCandidate:
    """argmin of e_global; ties break on lower e_part, then lower index."""
    if not cands:
        raise ValueError("no candidates to select from")
    best = min(range(len(cands)), key=lambda i: (cands[i].e_global, cands[i].e_part, i))
    return cands[best]


def plan_single(
    global_cloud: PointCloud,
    part: PointCloud,
    field: EnergyField,
    cfg: SamplerConfig,
    gripper: GripperModel | None = None,
) -> SingleArmPlan:
    """Full single-arm pipeline; the winner also carries its collision flag."""
    if gripper is None:
        gripper = getattr(field, "gripper", None) or GripperModel()
    cands = sample_grasps(global_cloud, part, field, cfg, arm="single")
    best = select_minimum_energy(cands)
    colliding, count = gripper_object_collision(best.pose, global_cloud, gripper)
    return SingleArmPlan(best, not colliding, count, tuple(cands))
