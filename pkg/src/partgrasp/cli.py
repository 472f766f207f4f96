"""Command-line interface.

Subcommands:
  gen-scene      sample a parametric object into scene JSON + PLY
  plan-single    single-arm grasp on a scene part
  plan-dual      dual-arm grasp pair on split target regions
  baseline-dual  dual-arm pair with FPS+KNN baseline regions
  bench          run the benchmark matrix and write a CSV report
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    format_table,
    grasp_flags,
    load_bench_config,
    run_benchmark,
    write_report_csv,
)
from .config import (
    field_from_config,
    load_toml,
    sampler_from_config,
    schedule_from_config,
    thresholds_from_config,
)
from .dual_arm import plan_dual, plan_dual_baseline
from .errors import NoFeasiblePairError, PartGraspError
from .objects import KINDS, gen_object
from .pointcloud import estimate_normals, save_ply
from .sampler import candidate_record, dump_candidates
from .scene import ground_target, load_scene, save_scene
from .single_arm import plan_single


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except PartGraspError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="partgrasp", description=__doc__)
    sub = parser.add_subparsers(required=True)

    p = sub.add_parser("gen-scene", help="generate a synthetic labeled scene")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--density", type=float, default=8000.0, help="points per square meter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_gen_scene)

    for name in ("plan-single", "plan-dual", "baseline-dual"):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} planning")
        p.add_argument("--scene", required=True, help="scene JSON path")
        p.add_argument("--part", required=True, help="part label, or * for the whole object")
        p.add_argument("--candidates", type=int, default=None)
        p.add_argument("--steps", type=int, default=None, help="Langevin steps per noise level")
        p.add_argument("--levels", type=int, default=None, help="noise levels in the schedule")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None, help="TOML with [energy]/[gripper]/[sampler]/[dual]")
        p.add_argument("--out", required=True, help="output JSON-lines file")
        p.add_argument("--dump-candidates", default=None, help="also dump every candidate")
        if name != "plan-single":
            p.add_argument("--delta", type=float, default=None, help="absolute energy threshold")
            p.add_argument("--fc-threshold", type=float, default=None)
            p.add_argument("--mu", type=float, default=None, help="friction coefficient")
            p.add_argument("--project-centers", action="store_true")
        if name == "baseline-dual":
            p.add_argument("--knn", type=int, default=None, help="baseline region size")
        p.set_defaults(handler=_cmd_plan, command=name)

    p = sub.add_parser("bench", help="run the benchmark matrix")
    p.add_argument("--config", required=True, help="bench TOML")
    p.add_argument("--out", required=True, help="CSV report path")
    p.set_defaults(handler=_cmd_bench)
    return parser


def _cmd_gen_scene(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    scene = gen_object(args.kind, args.scale, args.density, args.seed)
    ply_name = f"{args.kind}.ply"
    save_ply(scene.cloud, out_dir / ply_name)
    save_scene(scene, out_dir / "scene.json", ply_name)
    print(f"wrote {out_dir / 'scene.json'} ({len(scene.cloud)} points)")
    return 0


def _load_planning_inputs(args):
    raw = load_toml(args.config) if args.config else {}
    overrides = dict(levels=args.levels)
    schedule = schedule_from_config(raw, **overrides)
    field = field_from_config(raw, **overrides)
    cfg = sampler_from_config(
        raw,
        schedule=schedule,
        candidates=args.candidates,
        steps_per_level=args.steps,
        seed=args.seed,
    )
    scene = load_scene(args.scene)
    if not scene.cloud.has_normals:
        scene = _with_estimated_normals(scene)
    return raw, field, cfg, scene


def _with_estimated_normals(scene):
    from dataclasses import replace

    cloud = estimate_normals(scene.cloud, k=16)
    return replace(scene, cloud=cloud)


def _cmd_plan(args) -> int:
    raw, field, cfg, scene = _load_planning_inputs(args)
    gripper = field.gripper
    lines = []
    if args.command == "plan-single":
        grounding = ground_target(scene, args.part)
        plan = plan_single(grounding.global_cloud, grounding.target, field, cfg, gripper)
        flags = grasp_flags(plan.grasp, scene.cloud, grounding.target, gripper)
        lines.append(candidate_record(plan.grasp))
        lines.append(
            {
                "cfr_flag": plan.collision_free,
                "e_global": plan.grasp.e_global,
                "e_part": plan.grasp.e_part,
                "contained": flags["contained"],
            }
        )
        if args.dump_candidates:
            dump_candidates(list(plan.candidates), args.dump_candidates)
    else:
        thresholds = thresholds_from_config(
            raw,
            delta=args.delta,
            fc_threshold=args.fc_threshold,
            mu=args.mu,
            project_centers=args.project_centers or None,
        )
        try:
            if args.command == "plan-dual":
                plan = plan_dual(scene, args.part, field, cfg, thresholds, gripper)
            else:
                k = args.knn if args.knn is not None else max(10, len(scene.cloud) // 10)
                plan = plan_dual_baseline(scene, k, field, cfg, thresholds, gripper)
        except NoFeasiblePairError as e:
            Path(args.out).write_text(
                json.dumps({"error": "no-feasible-pair", "survivors": e.survivors}) + "\n"
            )
            print(f"no feasible pair (survivors {e.survivors})", file=sys.stderr)
            return 2
        lines.append(candidate_record(plan.pair.h1))
        lines.append(candidate_record(plan.pair.h2))
        lines.append(
            {
                "D_ij": plan.pair.center_distance,
                "fc_epsilon": plan.pair.fc_epsilon,
                "survivors": plan.survivors.as_list(),
                "delta": plan.delta,
            }
        )
    Path(args.out).write_text("".join(json.dumps(line) + "\n" for line in lines))
    print(f"wrote {args.out}")
    return 0


def _cmd_bench(args) -> int:
    config = load_bench_config(args.config)
    report = run_benchmark(config)
    write_report_csv(report, args.out)
    print(format_table(report))
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
