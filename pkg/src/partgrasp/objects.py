"""Parametric desk-scale objects sampled into labeled point clouds.

Every surface patch is sampled with a point budget proportional to its
area and carries exact analytic normals, so part labels are noise-free.
"""

from __future__ import annotations

import math

import numpy as np

from .pointcloud import PointCloud
from .scene import SceneDescription

KINDS = ("mug", "pot", "pan", "knife", "bottle", "keyboard", "basin", "laptop")

_DUAL_KINDS = {"pot", "keyboard", "basin", "laptop"}


class _Builder:
    """Accumulates labeled surface patches with area-proportional sampling."""

    def __init__(self, rng: np.random.Generator, density: float):
        self.rng = rng
        self.density = density
        self.points: list[np.ndarray] = []
        self.normals: list[np.ndarray] = []
        self.labels: list[str] = []
        self.total_area = 0.0

    def _count(self, area: float) -> int:
        self.total_area += area
        return max(1, int(round(area * self.density)))

    def add(self, label: str, pts: np.ndarray, nrm: np.ndarray) -> None:
        self.points.append(np.asarray(pts, float))
        self.normals.append(np.asarray(nrm, float))
        self.labels.extend([label] * len(pts))

    def cylinder_side(self, label, radius, h0, h1, center=(0, 0, 0), axis="z", inward=False):
        area = 2 * math.pi * radius * abs(h1 - h0)
        n = self._count(area)
        theta = self.rng.uniform(0, 2 * math.pi, n)
        h = self.rng.uniform(h0, h1, n)
        radial = np.stack([np.cos(theta), np.sin(theta), np.zeros(n)], axis=1)
        pts = radius * radial + np.outer(h, [0, 0, 1.0])
        nrm = -radial if inward else radial
        pts, nrm = _orient(pts, nrm, axis)
        self.add(label, pts + np.asarray(center, float), nrm)

    def disk(self, label, r_outer, h, out_dir, r_inner=0.0, center=(0, 0, 0), axis="z"):
        area = math.pi * (r_outer**2 - r_inner**2)
        n = self._count(area)
        theta = self.rng.uniform(0, 2 * math.pi, n)
        r = np.sqrt(self.rng.uniform(r_inner**2, r_outer**2, n))
        pts = np.stack([r * np.cos(theta), r * np.sin(theta), np.full(n, float(h))], axis=1)
        nrm = np.tile([0.0, 0.0, float(out_dir)], (n, 1))
        pts, nrm = _orient(pts, nrm, axis)
        self.add(label, pts + np.asarray(center, float), nrm)

    def box(self, label, center, half, rot=None):
        center = np.asarray(center, float)
        half = np.asarray(half, float)
        hx, hy, hz = half
        faces = [
            (0, +1, 4 * hy * hz),
            (0, -1, 4 * hy * hz),
            (1, +1, 4 * hx * hz),
            (1, -1, 4 * hx * hz),
            (2, +1, 4 * hx * hy),
            (2, -1, 4 * hx * hy),
        ]
        all_pts, all_nrm = [], []
        for ax, sign, area in faces:
            n = self._count(area)
            uv = self.rng.uniform(-1, 1, (n, 3)) * half
            uv[:, ax] = sign * half[ax]
            nrm = np.zeros((n, 3))
            nrm[:, ax] = sign
            all_pts.append(uv)
            all_nrm.append(nrm)
        pts = np.concatenate(all_pts)
        nrm = np.concatenate(all_nrm)
        if rot is not None:
            pts = pts @ rot.T
            nrm = nrm @ rot.T
        self.add(label, pts + center, nrm)

    def torus_section(self, label, center, major, minor, u0, u1):
        """Tube around the y-axis ring in the x-z plane, ring angle in [u0, u1]."""
        area = (u1 - u0) * major * 2 * math.pi * minor
        n = self._count(area)
        u = self.rng.uniform(u0, u1, n)
        v = self.rng.uniform(0, 2 * math.pi, n)
        ring = np.stack([np.cos(u), np.zeros(n), np.sin(u)], axis=1)
        nrm = np.cos(v)[:, None] * ring + np.outer(np.sin(v), [0, 1.0, 0])
        pts = major * ring + minor * nrm
        self.add(label, pts + np.asarray(center, float), nrm)

    def relabel(self, new_label: str, mask: np.ndarray) -> None:
        labels = np.array(self.labels, dtype=object)
        labels[mask] = new_label
        self.labels = list(labels)

    def all_points(self) -> np.ndarray:
        return np.concatenate(self.points)

    def finish(self, object_label: str, mode_hint: str, scale: float) -> SceneDescription:
        pts = self.all_points() * scale
        nrm = np.concatenate(self.normals)
        nrm = nrm / np.linalg.norm(nrm, axis=1, keepdims=True)
        labels = np.array(self.labels)
        parts = {label: np.flatnonzero(labels == label) for label in sorted(set(self.labels))}
        return SceneDescription(
            object_label=object_label,
            cloud=PointCloud(pts, nrm),
            parts=parts,
            mode_hint=mode_hint,
        )


def _orient(pts, nrm, axis):
    if axis == "z":
        return pts, nrm
    if axis == "x":  # map local z onto world x
        rot = np.array([[0, 0, 1.0], [0, 1.0, 0], [-1.0, 0, 0]])
    elif axis == "y":
        rot = np.array([[1.0, 0, 0], [0, 0, -1.0], [0, 1.0, 0]])
    else:
        raise ValueError(f"bad axis {axis!r}")
    return pts @ rot.T, nrm @ rot.T


def _build_mug(b: _Builder):
    b.cylinder_side("body", 0.040, 0.0, 0.100)
    b.cylinder_side("body", 0.036, 0.010, 0.100, inward=True)
    b.disk("body", 0.040, 0.0, -1)
    b.disk("body", 0.040, 0.100, +1, r_inner=0.036)
    b.torus_section("handle", (0.040, 0.0, 0.050), 0.028, 0.008, -1.4, 1.4)


def _build_pot(b: _Builder):
    b.cylinder_side("body", 0.110, 0.0, 0.120)
    b.cylinder_side("body", 0.104, 0.010, 0.120, inward=True)
    b.disk("body", 0.110, 0.0, -1)
    b.disk("body", 0.110, 0.120, +1, r_inner=0.104)
    # Two grippable rods sticking out along +-x near the rim.
    b.cylinder_side("handle_right", 0.012, 0.110, 0.170, center=(0, 0, 0.100), axis="x")
    b.disk("handle_right", 0.012, 0.170, +1, center=(0, 0, 0.100), axis="x")
    b.cylinder_side("handle_left", 0.012, -0.170, -0.110, center=(0, 0, 0.100), axis="x")
    b.disk("handle_left", 0.012, -0.170, -1, center=(0, 0, 0.100), axis="x")


def _build_pan(b: _Builder):
    b.cylinder_side("body", 0.120, 0.0, 0.040)
    b.cylinder_side("body", 0.114, 0.008, 0.040, inward=True)
    b.disk("body", 0.120, 0.0, -1)
    b.disk("body", 0.120, 0.040, +1, r_inner=0.114)
    b.cylinder_side("handle", 0.009, 0.120, 0.300, center=(0, 0, 0.030), axis="x")
    b.disk("handle", 0.009, 0.300, +1, center=(0, 0, 0.030), axis="x")


def _build_knife(b: _Builder):
    b.box("blade", (0.060, 0.0, 0.0), (0.060, 0.0015, 0.012))
    b.box("handle", (-0.050, 0.0, 0.0), (0.050, 0.009, 0.011))


def _build_bottle(b: _Builder):
    b.cylinder_side("body", 0.035, 0.0, 0.160)
    b.disk("body", 0.035, 0.0, -1)
    b.disk("body", 0.035, 0.160, +1, r_inner=0.015)
    b.cylinder_side("neck", 0.015, 0.160, 0.220)
    b.disk("neck", 0.015, 0.220, +1)


def _build_keyboard(b: _Builder):
    b.box("body", (0.0, 0.0, 0.010), (0.230, 0.075, 0.010))


def _build_basin(b: _Builder):
    b.cylinder_side("body", 0.160, 0.0, 0.110)
    b.cylinder_side("body", 0.152, 0.012, 0.110, inward=True)
    b.disk("body", 0.160, 0.0, -1)
    b.disk("body", 0.160, 0.110, +1, r_inner=0.152)
    pts = b.all_points()
    near_rim = pts[:, 2] >= 0.080
    for label, sign in (("handle_left", -1), ("handle_right", +1)):
        patch = near_rim & (sign * pts[:, 0] >= 0.120) & (np.abs(pts[:, 1]) <= 0.070)
        b.relabel(label, patch)


def _build_laptop(b: _Builder):
    b.box("body", (0.0, 0.0, 0.006), (0.115, 0.165, 0.006))
    open_angle = math.radians(110.0)
    c, s = math.cos(open_angle), math.sin(open_angle)
    rot = np.array([[c, 0, -s], [0, 1.0, 0], [s, 0, c]])  # local +x -> screen direction
    screen_center = np.array([-0.115, 0.0, 0.006]) + rot @ np.array([0.110, 0.0, 0.0])
    b.box("body", screen_center, (0.110, 0.165, 0.005), rot=rot)


_BUILDERS = {
    "mug": _build_mug,
    "pot": _build_pot,
    "pan": _build_pan,
    "knife": _build_knife,
    "bottle": _build_bottle,
    "keyboard": _build_keyboard,
    "basin": _build_basin,
    "laptop": _build_laptop,
}


def gen_object(kind: str, scale: float, density: float, seed: int) -> SceneDescription:
    """Sample one of the parametric objects into a labeled scene.

    density is points per square meter after scaling; it must yield at
    least 500 points in total.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown object kind {kind!r}, choose from {KINDS}")
    if scale <= 0:
        raise ValueError("scale must be positive")
    if density <= 0:
        raise ValueError("density must be positive")
    rng = np.random.default_rng(seed)
    b = _Builder(rng, density * scale * scale)
    _BUILDERS[kind](b)
    scene = b.finish(kind, "dual" if kind in _DUAL_KINDS else "single", scale)
    if len(scene.cloud) < 500:
        raise ValueError(f"density {density} yields only {len(scene.cloud)} points (need >= 500)")
    return scene


def analytic_area(kind: str, scale: float = 1.0) -> float:
    """Closed-form total surface area of a kind, for sampling-density checks."""
    rng = np.random.default_rng(0)
    b = _Builder(rng, 1.0)
    _BUILDERS[kind](b)
    return b.total_area * scale * scale
