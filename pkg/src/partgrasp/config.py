"""TOML configuration for energy, gripper, sampler and dual-arm settings.

All keys are optional; missing keys fall back to the package defaults.
"""

from __future__ import annotations

import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dual_arm import DualArmThresholds
from .energy import AntipodalSurrogateField, EnergyWeights, GripperModel, NoiseSchedule, make_schedule
from .sampler import SamplerConfig

SAMPLER_DEFAULTS = {
    "candidates": 100,
    "levels": 10,
    "steps_per_level": 35,
    "seed": 0,
    "sigma_max": 0.08,
    "sigma_min": 0.004,
    "step_scale": 6e-4,
}


def load_toml(path) -> dict:
    with open(Path(path), "rb") as f:
        return tomllib.load(f)


def gripper_from_config(cfg: dict) -> GripperModel:
    sec = cfg.get("gripper", {})
    return GripperModel(
        max_jaw_width=float(sec.get("max_jaw_width", 0.085)),
        finger_length=float(sec.get("finger_length", 0.06)),
        finger_thickness=float(sec.get("finger_thickness", 0.01)),
        palm_depth=float(sec.get("palm_depth", 0.02)),
    )


def weights_from_config(cfg: dict) -> EnergyWeights:
    sec = cfg.get("energy", {})
    return EnergyWeights(
        w_dist=float(sec.get("w_dist", 1.0)),
        w_pen=float(sec.get("w_pen", 20.0)),
        w_anti=float(sec.get("w_anti", 0.5)),
    )


def schedule_from_config(cfg: dict, **overrides) -> NoiseSchedule:
    sec = {**SAMPLER_DEFAULTS, **cfg.get("sampler", {}), **_drop_none(overrides)}
    return make_schedule(
        int(sec["levels"]),
        float(sec["sigma_max"]),
        float(sec["sigma_min"]),
        float(sec["step_scale"]),
    )


def sampler_from_config(cfg: dict, schedule: NoiseSchedule | None = None, **overrides) -> SamplerConfig:
    sec = {**SAMPLER_DEFAULTS, **cfg.get("sampler", {}), **_drop_none(overrides)}
    init_radius = sec.get("init_radius")
    return SamplerConfig(
        num_candidates=int(sec["candidates"]),
        schedule=schedule,
        steps_per_level=int(sec["steps_per_level"]),
        seed=int(sec["seed"]),
        init_radius=None if init_radius is None else float(init_radius),
    )


def thresholds_from_config(cfg: dict, **overrides) -> DualArmThresholds:
    sec = {**cfg.get("dual", {}), **_drop_none(overrides)}
    return DualArmThresholds(
        delta=None if sec.get("delta") is None else float(sec["delta"]),
        delta_percentile=float(sec.get("delta_percentile", 60.0)),
        fc_threshold=float(sec.get("fc_threshold", 1e-3)),
        mu=float(sec.get("mu", 0.5)),
        cone_edges=int(sec.get("cone_edges", 8)),
        project_centers=bool(sec.get("project_centers", False)),
    )


def field_from_config(cfg: dict, **sampler_overrides) -> AntipodalSurrogateField:
    return AntipodalSurrogateField(
        gripper=gripper_from_config(cfg),
        schedule=schedule_from_config(cfg, **sampler_overrides),
        weights=weights_from_config(cfg),
    )


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}
