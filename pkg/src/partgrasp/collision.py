"""Gripper geometry queries: object collision, gripper-gripper SAT, contacts.

The gripper is three oriented boxes (two fingers, one palm). The jaw
opening between the fingers is deliberately not a collision volume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import GripperModel
from .errors import MissingNormalsError
from .pointcloud import PointCloud
from .se3 import Pose


@dataclass(frozen=True)
class Contact:
    """A contact point with the object's outward unit normal."""

    point: np.ndarray
    normal: np.ndarray
    arm: str = "single"

    def __post_init__(self):
        p = np.asarray(self.point, dtype=float)
        n = np.asarray(self.normal, dtype=float)
        if p.shape != (3,) or n.shape != (3,):
            raise ValueError("contact point/normal must be 3-vectors")
        if abs(np.linalg.norm(n) - 1.0) > 1e-6:
            raise ValueError("contact normal must be unit length")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "normal", n)


def world_boxes(pose: Pose, g: GripperModel) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """(center, rotation, half_extents) for the gripper's boxes in world frame."""
    rot = pose.rotation_matrix()
    return [(pose.apply_point(c), rot, h) for c, h in g.local_boxes()]


def gripper_object_collision(pose: Pose, cloud: PointCloud, g: GripperModel) -> tuple[bool, int]:
    """Count cloud points strictly inside the finger/palm boxes."""
    local = (cloud.points - pose.translation) @ pose.rotation_matrix()
    count = 0
    for center, half in g.local_boxes():
        inside = np.all(np.abs(local - center) < half, axis=1)
        count += int(inside.sum())
    return count > 0, count


def _obb_intersect(c1, r1, h1, c2, r2, h2) -> bool:
    """Separating-axis test; boxes touching at a face count as intersecting."""
    t = c2 - c1
    axes = [r1[:, i] for i in range(3)] + [r2[:, i] for i in range(3)]
    for i in range(3):
        for j in range(3):
            cross = np.cross(r1[:, i], r2[:, j])
            norm = np.linalg.norm(cross)
            if norm > 1e-9:
                axes.append(cross / norm)
    for axis in axes:
        ra = np.abs(r1.T @ axis) @ h1
        rb = np.abs(r2.T @ axis) @ h2
        if abs(float(t @ axis)) > ra + rb:
            return False
    return True


def gripper_gripper_collision(pose1: Pose, pose2: Pose, g: GripperModel) -> bool:
    """True iff any box of gripper 1 intersects any box of gripper 2."""
    boxes1 = world_boxes(pose1, g)
    boxes2 = world_boxes(pose2, g)
    # Cheap sphere reject before the 9 SAT tests.
    r_outer = np.linalg.norm(
        [g.max_jaw_width / 2 + g.finger_thickness, g.finger_thickness / 2,
         g.finger_length + g.palm_depth]
    )
    if np.linalg.norm(pose2.translation - pose1.translation) > 2 * r_outer + 1e-9:
        return False
    for c1, r1, h1 in boxes1:
        for c2, r2, h2 in boxes2:
            if _obb_intersect(c1, r1, h1, c2, r2, h2):
                return True
    return False


def extract_contacts(pose: Pose, cloud: PointCloud, g: GripperModel, arm: str = "single") -> list[Contact]:
    """Per finger pad, the swept-volume cloud point nearest the pad plane.

    Returns 0, 1 or 2 contacts; normals come from the cloud.
    """
    if not cloud.has_normals:
        raise MissingNormalsError("contact extraction needs cloud normals")
    local = (cloud.points - pose.translation) @ pose.rotation_matrix()
    x, y, z = local[:, 0], local[:, 1], local[:, 2]
    halfw = g.max_jaw_width / 2
    in_pad = (np.abs(y) <= g.finger_thickness / 2) & (z >= -g.finger_length) & (z <= 0.0)
    contacts = []
    for mask, toward in (
        (in_pad & (x >= 0.0) & (x <= halfw), x),
        (in_pad & (x < 0.0) & (x >= -halfw), -x),
    ):
        if not mask.any():
            continue
        scored = np.where(mask, toward, -np.inf)
        idx = int(np.argmax(scored))  # ties resolve to the lowest index
        contacts.append(Contact(cloud.points[idx], cloud.normals[idx], arm))
    return contacts
