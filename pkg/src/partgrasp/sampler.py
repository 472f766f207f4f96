"""Annealed Langevin sampling on SE(3) with part-guided max-energy steering.

Each step evaluates a candidate against both the global cloud and the
target part; the larger of the two energies selects which score drives
the update, so candidates drift onto the part without leaving the set of
globally valid poses. Candidates evolve on independent seeded substreams,
so results do not depend on batch layout or worker count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .energy import EnergyField, NoiseSchedule
from .pointcloud import PointCloud
from .se3 import Pose, Twist, compose_many, se3_exp_many

ARMS = ("single", "arm1", "arm2")


@dataclass(frozen=True)
class GraspCandidate:
    """A pose annotated with its final global and part energies."""

    pose: Pose
    e_global: float
    e_part: float
    arm: str = "single"

    def __post_init__(self):
        if self.arm not in ARMS:
            raise ValueError(f"arm must be one of {ARMS}")


@dataclass(frozen=True)
class SamplerConfig:
    num_candidates: int = 100
    schedule: NoiseSchedule | None = None  # None: use the field's schedule
    steps_per_level: int = 35
    seed: int = 0
    init_radius: float | None = None  # None: part bounding radius + jaw width
    # Cap the drift alpha*|s| of one update at score_clip*sigma. The
    # penetration term's gradient grows with the number of points inside
    # the gripper, so unclipped steps can eject candidates irrecoverably.
    score_clip: float | None = 1.0
    # Characteristic length (m) converting the meters-equivalent noise
    # scale into radians for the angular block: rotating by sigma/rot_length
    # moves gripper surfaces by about sigma. None: derived from the
    # energy field's gripper reach.
    rot_length: float | None = None

    def __post_init__(self):
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be >= 1")
        if self.steps_per_level < 0:
            raise ValueError("steps_per_level must be >= 0")
        if self.score_clip is not None and self.score_clip <= 0:
            raise ValueError("score_clip must be positive or None")
        if self.rot_length is not None and self.rot_length <= 0:
            raise ValueError("rot_length must be positive or None")


def guided_energy(
    pose: Pose, k: int, global_cloud: PointCloud, part: PointCloud, field: EnergyField
) -> tuple[float, str]:
    """max of global and part energies, plus which branch attained it.

    Ties resolve to the global branch.
    """
    _check_clouds(global_cloud, part)
    e_global = field.evaluate(pose, k, global_cloud)
    e_part = field.evaluate(pose, k, part)
    if e_part > e_global:
        return e_part, "part"
    return e_global, "global"


def guided_score(
    pose: Pose, k: int, global_cloud: PointCloud, part: PointCloud, field: EnergyField
) -> Twist:
    """Score of whichever branch guided_energy selects."""
    _, branch = guided_energy(pose, k, global_cloud, part, field)
    cloud = part if branch == "part" else global_cloud
    return field.score(pose, k, cloud)


def _check_clouds(global_cloud: PointCloud, part: PointCloud) -> None:
    if len(global_cloud) == 0:
        raise ValueError("global cloud is empty")
    if len(part) == 0:
        raise ValueError("target part cloud is empty")


def _resolve_schedule(field: EnergyField, cfg: SamplerConfig) -> NoiseSchedule:
    sched = cfg.schedule or getattr(field, "schedule", None)
    if sched is None:
        raise ValueError("no schedule: set SamplerConfig.schedule or use a field that has one")
    field_sched = getattr(field, "schedule", None)
    if field_sched is not None and field_sched.num_levels != sched.num_levels:
        raise ValueError("sampler schedule and energy-field schedule disagree on level count")
    return sched


def _default_init_radius(part: PointCloud, field: EnergyField) -> float:
    jaw = getattr(getattr(field, "gripper", None), "max_jaw_width", 0.085)
    return part.bounding_radius() + jaw


def _default_rot_length(field: EnergyField) -> float:
    g = getattr(field, "gripper", None)
    if g is None:
        return 0.08
    return max(g.finger_length + g.palm_depth, g.max_jaw_width / 2)


def sample_grasps(
    global_cloud: PointCloud,
    part: PointCloud,
    field: EnergyField,
    cfg: SamplerConfig,
    arm: str = "single",
) -> list[GraspCandidate]:
    """Generate num_candidates grasps, sorted ascending by final global energy.

    Initial translations are uniform in a ball around the part centroid,
    rotations uniform on SO(3). Levels run coarse to fine; at each rung the
    update is H <- exp(alpha*s + sqrt(2*alpha)*sigma*eta) * H with eta a
    standard normal in the tangent space, where the angular block of both
    score and noise is measured through the rot_length metric so the
    meters-equivalent noise scale moves rotations as far as translations.
    Final energies are evaluated at level 0 (the finest noise scale).
    Deterministic under cfg.seed.
    """
    _check_clouds(global_cloud, part)
    sched = _resolve_schedule(field, cfg)
    n = cfg.num_candidates
    radius = cfg.init_radius if cfg.init_radius is not None else _default_init_radius(part, field)
    rot_len = cfg.rot_length if cfg.rot_length is not None else _default_rot_length(field)

    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(n)]
    center = part.centroid()
    quats = np.empty((n, 4))
    trans = np.empty((n, 3))
    for i, rng in enumerate(rngs):
        direction = rng.standard_normal(3)
        direction /= max(np.linalg.norm(direction), 1e-12)
        trans[i] = center + radius * rng.random() ** (1.0 / 3.0) * direction
        q = rng.standard_normal(4)
        quats[i] = q / np.linalg.norm(q)

    levels = sched.num_levels
    for level in reversed(range(levels)):  # coarse -> fine
        sigma = sched.sigma_at(level)
        alpha = sched.step_at(level)
        noise_scale = np.sqrt(2.0 * alpha) * sigma
        for _ in range(cfg.steps_per_level):
            e_global = field.evaluate_arrays(quats, trans, level, global_cloud)
            e_part = field.evaluate_arrays(quats, trans, level, part)
            part_branch = e_part > e_global
            scores = np.empty((n, 6))
            idx_g = np.flatnonzero(~part_branch)
            idx_p = np.flatnonzero(part_branch)
            if idx_g.size:
                scores[idx_g] = field.score_arrays(quats[idx_g], trans[idx_g], level, global_cloud)
            if idx_p.size:
                scores[idx_p] = field.score_arrays(quats[idx_p], trans[idx_p], level, part)
            # Metric-normalized coordinates u = (rot_length*omega, v): the
            # score's angular block picks up a 1/rot_length, and the usual
            # Langevin step in u maps back with another 1/rot_length.
            scores_u = scores.copy()
            scores_u[:, :3] /= rot_len
            if cfg.score_clip is not None:
                cap = cfg.score_clip * sigma / alpha
                norms = np.linalg.norm(scores_u, axis=1, keepdims=True)
                scores_u = scores_u * np.minimum(1.0, cap / np.maximum(norms, 1e-300))
            eta = np.stack([rng.standard_normal(6) for rng in rngs])
            xi = alpha * scores_u + noise_scale * eta
            xi[:, :3] /= rot_len
            dq, dt = se3_exp_many(xi)
            quats, trans = compose_many(dq, dt, quats, trans)

    e_global = field.evaluate_arrays(quats, trans, 0, global_cloud)
    e_part = field.evaluate_arrays(quats, trans, 0, part)
    candidates = [
        GraspCandidate(Pose(quats[i], trans[i]), float(e_global[i]), float(e_part[i]), arm)
        for i in range(n)
    ]
    order = np.argsort(e_global, kind="stable")
    return [candidates[int(i)] for i in order]


def candidate_record(c: GraspCandidate) -> dict:
    """Wire format for candidate dumps (one JSON object per line)."""
    return {
        "arm": c.arm,
        "translation": [float(v) for v in c.pose.translation],
        "quaternion": [float(v) for v in c.pose.rotation],
        "e_global": c.e_global,
        "e_part": c.e_part,
    }


def candidate_from_record(rec: dict) -> GraspCandidate:
    return GraspCandidate(
        Pose(rec["quaternion"], rec["translation"]),
        float(rec["e_global"]),
        float(rec["e_part"]),
        rec.get("arm", "single"),
    )


def dump_candidates(cands: list[GraspCandidate], path) -> None:
    with open(path, "w") as f:
        for c in cands:
            f.write(json.dumps(candidate_record(c)) + "\n")
