"""Benchmark harness: seeded trials over synthetic objects, CSV + text report.

Metrics per (object, method) row:
  cfr               fraction of selected grasps whose gripper does not
                    collide with the object cloud
  part_containment  fraction of selected grasps whose extracted contacts
                    all sit within 1 cm of their target region
  stability_proxy   fraction of trials with two pad contacts per gripper,
                    antipodal to within 30 degrees, and (dual) a pooled
                    force-closure score above threshold
  mean_D            mean gripper-center distance of successful dual trials
  runtime_s         mean wall time per trial

Failed trials (no feasible pair) count against every fraction.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .collision import extract_contacts, gripper_object_collision
from .config import (
    field_from_config,
    gripper_from_config,
    sampler_from_config,
    schedule_from_config,
    thresholds_from_config,
)
from .dual_arm import DualArmThresholds, plan_dual, plan_dual_baseline
from .energy import GripperModel
from .errors import NoFeasiblePairError, PartGraspError
from .objects import KINDS, gen_object
from .pointcloud import PointCloud
from .sampler import GraspCandidate
from .scene import SceneDescription, ground_target
from .single_arm import plan_single

CONTAINMENT_RADIUS = 0.01
ANTIPODAL_COS = math.cos(math.radians(30.0))

METHODS = ("ours-single", "ours-dual", "baseline-dual", "unconstrained")

DEFAULT_PART_LABELS = {
    "mug": "handle",
    "pot": "handle",
    "pan": "handle",
    "knife": "handle",
    "bottle": "neck",
    "basin": "handle",
    "keyboard": "*",
    "laptop": "*",
}

CSV_COLUMNS = [
    "object",
    "method",
    "trials",
    "cfr",
    "part_containment",
    "stability_proxy",
    "mean_D",
    "runtime_s",
]


@dataclass(frozen=True)
class BenchConfig:
    objects: tuple[str, ...] = ("pot", "basin", "keyboard", "laptop")
    methods: tuple[str, ...] = ("ours-dual", "baseline-dual")
    trials: int = 30
    seed: int = 0
    scale: float = 1.0
    density: float = 8000.0
    knn_k: int | None = None  # None: |cloud| // 10
    part_labels: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)  # sampler/energy/gripper/dual sections

    def __post_init__(self):
        for obj in self.objects:
            if obj not in KINDS:
                raise ValueError(f"unknown object {obj!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def load_bench_config(path) -> BenchConfig:
    from .config import load_toml

    raw = load_toml(path)
    sec = raw.get("bench", {})
    return BenchConfig(
        objects=tuple(sec.get("objects", ("pot", "basin", "keyboard", "laptop"))),
        methods=tuple(sec.get("methods", ("ours-dual", "baseline-dual"))),
        trials=int(sec.get("trials", 30)),
        seed=int(sec.get("seed", 0)),
        scale=float(sec.get("scale", 1.0)),
        density=float(sec.get("density", 8000.0)),
        knn_k=sec.get("knn_k"),
        part_labels=dict(sec.get("parts", {})),
        raw=raw,
    )


@dataclass(frozen=True)
class TrialOutcome:
    grasps: tuple[GraspCandidate, ...]
    regions: tuple[PointCloud, ...]  # one target region per grasp
    pair_distance: float | None
    pair_fc: float | None
    failed: bool
    runtime_s: float


def grasp_flags(
    grasp: GraspCandidate,
    scene_cloud: PointCloud,
    region: PointCloud,
    gripper: GripperModel,
) -> dict:
    """Per-grasp metric flags: collision-free, containment, antipodality."""
    colliding, count = gripper_object_collision(grasp.pose, scene_cloud, gripper)
    contacts = extract_contacts(grasp.pose, scene_cloud, gripper, grasp.arm)
    contained = False
    if contacts:
        dists = [
            float(np.linalg.norm(region.points - c.point, axis=1).min()) for c in contacts
        ]
        contained = max(dists) <= CONTAINMENT_RADIUS
    antipodal = False
    if len(contacts) == 2:
        antipodal = abs(float(contacts[0].normal @ contacts[1].normal)) >= ANTIPODAL_COS
    return {
        "collision_free": not colliding,
        "collision_count": count,
        "n_contacts": len(contacts),
        "contained": contained,
        "antipodal": antipodal,
    }


def run_trial(
    scene: SceneDescription,
    method: str,
    part_label: str,
    cfg_raw: dict,
    seed: int,
    knn_k: int | None,
) -> TrialOutcome:
    """One seeded trial of one method; failures are recorded, not raised."""
    field_ = field_from_config(cfg_raw)
    schedule = schedule_from_config(cfg_raw)
    sampler_cfg = sampler_from_config(cfg_raw, schedule=schedule, seed=seed)
    thresholds = thresholds_from_config(cfg_raw)
    gripper = field_.gripper
    t0 = time.perf_counter()
    try:
        if method in ("ours-single", "unconstrained"):
            label = "*" if method == "unconstrained" else part_label
            grounding = ground_target(scene, label)
            plan = plan_single(grounding.global_cloud, grounding.target, field_, sampler_cfg, gripper)
            outcome = TrialOutcome(
                (plan.grasp,), (grounding.target,), None, None, False, 0.0
            )
        else:
            if method == "ours-dual":
                plan = plan_dual(scene, part_label, field_, sampler_cfg, thresholds, gripper)
            else:
                k = knn_k if knn_k is not None else max(10, len(scene.cloud) // 10)
                plan = plan_dual_baseline(scene, k, field_, sampler_cfg, thresholds, gripper)
            outcome = TrialOutcome(
                (plan.pair.h1, plan.pair.h2),
                (plan.region1, plan.region2),
                plan.pair.center_distance,
                plan.pair.fc_epsilon,
                False,
                0.0,
            )
    except (NoFeasiblePairError, PartGraspError):
        outcome = TrialOutcome((), (), None, None, True, 0.0)
    return replace(outcome, runtime_s=time.perf_counter() - t0)


def compute_metrics(
    outcomes: list[TrialOutcome],
    scene: SceneDescription,
    method: str,
    gripper: GripperModel,
    fc_threshold: float,
) -> dict:
    """Aggregate one (object, method) row from its trial outcomes."""
    arms = 1 if method in ("ours-single", "unconstrained") else 2
    n_grasp_slots = len(outcomes) * arms
    cfr_hits = 0
    contained_hits = 0
    stable_trials = 0
    distances = []
    runtimes = []
    for out in outcomes:
        runtimes.append(out.runtime_s)
        if out.failed:
            continue
        flags = [
            grasp_flags(g, scene.cloud, r, gripper) for g, r in zip(out.grasps, out.regions)
        ]
        cfr_hits += sum(f["collision_free"] for f in flags)
        contained_hits += sum(f["contained"] for f in flags)
        stable = all(f["n_contacts"] >= 2 and f["antipodal"] for f in flags)
        if arms == 2:
            stable = stable and out.pair_fc is not None and out.pair_fc >= fc_threshold
            if out.pair_distance is not None:
                distances.append(out.pair_distance)
        stable_trials += int(stable)
    return {
        "object": scene.object_label,
        "method": method,
        "trials": len(outcomes),
        "cfr": cfr_hits / n_grasp_slots,
        "part_containment": contained_hits / n_grasp_slots,
        "stability_proxy": stable_trials / len(outcomes),
        "mean_D": float(np.mean(distances)) if distances else 0.0,
        "runtime_s": float(np.mean(runtimes)),
    }


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[dict, ...]  # per (object, method), then one aggregate per method

    def method_rows(self, method: str) -> list[dict]:
        return [r for r in self.rows if r["method"] == method and r["object"] != "average"]

    def aggregate_row(self, method: str) -> dict:
        for r in self.rows:
            if r["method"] == method and r["object"] == "average":
                return r
        raise KeyError(method)


def run_benchmark(config: BenchConfig) -> BenchReport:
    rows = []
    per_method: dict[str, list[dict]] = {m: [] for m in config.methods}
    for obj in config.objects:
        scene = gen_object(obj, config.scale, config.density, config.seed)
        part_label = config.part_labels.get(obj, DEFAULT_PART_LABELS[obj])
        gripper = gripper_from_config(config.raw)
        thresholds = thresholds_from_config(config.raw)
        for method in config.methods:
            outcomes = [
                run_trial(scene, method, part_label, config.raw, config.seed + t, config.knn_k)
                for t in range(config.trials)
            ]
            row = compute_metrics(outcomes, scene, method, gripper, thresholds.fc_threshold)
            rows.append(row)
            per_method[method].append(row)
    for method in config.methods:
        group = per_method[method]
        agg = {
            "object": "average",
            "method": method,
            "trials": int(np.sum([r["trials"] for r in group])),
        }
        for key in ("cfr", "part_containment", "stability_proxy", "mean_D", "runtime_s"):
            agg[key] = float(np.mean([r[key] for r in group]))
        rows.append(agg)
    return BenchReport(tuple(rows))


def write_report_csv(report: BenchReport, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for row in report.rows:
            writer.writerow(
                [
                    row["object"],
                    row["method"],
                    row["trials"],
                    repr(row["cfr"]),
                    repr(row["part_containment"]),
                    repr(row["stability_proxy"]),
                    repr(row["mean_D"]),
                    repr(row["runtime_s"]),
                ]
            )


def parse_report_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for rec in reader:
            rows.append(
                {
                    "object": rec["object"],
                    "method": rec["method"],
                    "trials": int(rec["trials"]),
                    "cfr": float(rec["cfr"]),
                    "part_containment": float(rec["part_containment"]),
                    "stability_proxy": float(rec["stability_proxy"]),
                    "mean_D": float(rec["mean_D"]),
                    "runtime_s": float(rec["runtime_s"]),
                }
            )
    return rows


def format_table(report: BenchReport) -> str:
    header = ["object", "method", "trials", "cfr", "contain", "stable", "mean_D", "time_s"]
    lines = []
    body = []
    for r in report.rows:
        body.append(
            [
                r["object"],
                r["method"],
                str(r["trials"]),
                f"{r['cfr']:.3f}",
                f"{r['part_containment']:.3f}",
                f"{r['stability_proxy']:.3f}",
                f"{r['mean_D']:.3f}",
                f"{r['runtime_s']:.2f}",
            ]
        )
    widths = [max(len(h), *(len(row[i]) for row in body)) for i, h in enumerate(header)]
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)
