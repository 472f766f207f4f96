"""Energy field over grasp poses: lower energy means a better grasp.

The analytic surrogate scores a parallel-jaw pose against a point cloud
with three non-negative terms:

  D  soft-min distance (log-sum-exp, temperature = noise scale) from the
     jaw closing segment to the cloud,
  V  summed penetration depth of cloud points inside the finger/palm boxes,
  A  antipodality misfit of the two candidate pad contacts,

combined as w_d*D + w_p*V + w_a*A. Scores are central finite differences
of the energy in the pose's 6-dim tangent space (left-multiplicative
convention), negated.

Noise levels count residual noise down to zero: level 0 is the finest
(sigma_min), level num_levels-1 the coarsest (sigma_max). The schedule
arrays themselves run coarse to fine in ladder order.
"""

from __future__ import annotations

import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from numba import config as _numba_config
    from numba import njit, prange

# Skip the TBB probe (stale TBB in some images warns at first launch).
_numba_config.THREADING_LAYER = "omp"

from .errors import MissingNormalsError
from .pointcloud import PointCloud
from .se3 import Pose, Twist, se3_exp


@dataclass(frozen=True)
class NoiseSchedule:
    """Geometric noise ladder sigma_max -> sigma_min with per-rung step sizes."""

    sigmas: np.ndarray
    step_sizes: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigmas, dtype=float)
        a = np.asarray(self.step_sizes, dtype=float)
        if s.ndim != 1 or s.shape != a.shape:
            raise ValueError("sigmas and step_sizes must be 1-d and equal length")
        if np.any(s <= 0) or np.any(a <= 0):
            raise ValueError("sigmas and step_sizes must be positive")
        if np.any(np.diff(s) >= 0):
            raise ValueError("sigmas must be strictly decreasing")
        s.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "sigmas", s)
        object.__setattr__(self, "step_sizes", a)

    @property
    def num_levels(self) -> int:
        return len(self.sigmas)

    def sigma_at(self, level: int) -> float:
        """Noise scale for a residual-noise level (0 = finest)."""
        return float(self.sigmas[self._ladder_index(level)])

    def step_at(self, level: int) -> float:
        return float(self.step_sizes[self._ladder_index(level)])

    def _ladder_index(self, level: int) -> int:
        if not 0 <= level < self.num_levels:
            raise ValueError(f"level {level} out of range [0, {self.num_levels})")
        return self.num_levels - 1 - level


def make_schedule(
    levels: int, sigma_max: float, sigma_min: float, step_scale: float
) -> NoiseSchedule:
    """Geometric interpolation: sigmas[k] = sigma_max*(sigma_min/sigma_max)^(k/(levels-1))."""
    if levels < 2:
        raise ValueError("levels must be >= 2")
    if not sigma_max > sigma_min > 0:
        raise ValueError("need sigma_max > sigma_min > 0")
    if step_scale <= 0:
        raise ValueError("step_scale must be positive")
    k = np.arange(levels)
    sigmas = sigma_max * (sigma_min / sigma_max) ** (k / (levels - 1))
    steps = step_scale * sigmas**2 / sigma_min**2
    return NoiseSchedule(sigmas, steps)


@dataclass(frozen=True)
class GripperModel:
    """Parallel-jaw geometry in the grasp frame.

    +z is the approach axis, x the jaw-closing axis, and the origin sits at
    the midpoint between the fingertip pads. Fingers span z in
    [-finger_length, 0]; the palm sits behind them.
    """

    max_jaw_width: float = 0.085
    finger_length: float = 0.06
    finger_thickness: float = 0.01
    palm_depth: float = 0.02

    def __post_init__(self):
        for name in ("max_jaw_width", "finger_length", "finger_thickness", "palm_depth"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_jaw_width <= 2 * self.finger_thickness:
            raise ValueError("max_jaw_width must exceed twice the finger thickness")

    def local_boxes(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(center, half_extents) of the two finger boxes and the palm box."""
        w, t, l, d = self.max_jaw_width, self.finger_thickness, self.finger_length, self.palm_depth
        finger_half = np.array([t / 2, t / 2, l / 2])
        cx = (w + t) / 2
        return [
            (np.array([cx, 0.0, -l / 2]), finger_half),
            (np.array([-cx, 0.0, -l / 2]), finger_half),
            (np.array([0.0, 0.0, -l - d / 2]), np.array([(w + 2 * t) / 2, t / 2, d / 2])),
        ]


@dataclass(frozen=True)
class EnergyWeights:
    w_dist: float = 1.0
    w_pen: float = 20.0
    w_anti: float = 0.5


class EnergyField(ABC):
    """Scalar energy over poses plus its tangent-space score.

    Implementations must be immutable after construction and safe for
    concurrent evaluate/score calls.
    """

    @abstractmethod
    def evaluate(self, pose: Pose, k: int, cloud: PointCloud) -> float: ...

    @abstractmethod
    def score(self, pose: Pose, k: int, cloud: PointCloud) -> Twist: ...

    def evaluate_arrays(self, quats: np.ndarray, trans: np.ndarray, k: int, cloud: PointCloud) -> np.ndarray:
        return np.array([self.evaluate(Pose(q, t), k, cloud) for q, t in zip(quats, trans)])

    def score_arrays(self, quats: np.ndarray, trans: np.ndarray, k: int, cloud: PointCloud) -> np.ndarray:
        return np.stack(
            [self.score(Pose(q, t), k, cloud).as_vector() for q, t in zip(quats, trans)]
        )


def _require_conditioning(cloud: PointCloud) -> None:
    if len(cloud) == 0:
        raise ValueError("conditioning cloud is empty")
    if not cloud.has_normals:
        raise MissingNormalsError("surrogate energy needs per-point normals")


@njit(cache=True, parallel=True)
def _energy_kernel(quats, trans, pts, normals, w, t, l, pd, sigma, w_d, w_p, w_a):
    """Fused per-candidate energy: one pass over the cloud per grasp pose.

    D is the mean-form log-sum-exp soft-min distance from the grasp center
    (so hard_min <= D <= hard_min + sigma*log N, non-negative and smooth).
    V sums strict penetration depths of the two finger boxes and the palm
    box. A is a smooth antipodality misfit: each jaw side accumulates
    evidence of surface it could close on (Gaussian capture zone spanning
    its half of the jaw window, times squared normal alignment with the
    closing direction), and A = 1 - cap_pos*cap_neg drops to zero only
    when both sides saturate, i.e. at two-sided antipodal capture. The
    noise scale widens the capture zones, matching the annealing of D.
    """
    n_poses = quats.shape[0]
    n_pts = pts.shape[0]
    out = np.empty(n_poses)
    halfw = 0.5 * w
    t2 = 0.5 * t
    finger_cx = 0.5 * (w + t)
    finger_hz = 0.5 * l
    palm_hx = 0.5 * w + t
    palm_hz = 0.5 * pd
    palm_cz = -l - 0.5 * pd
    pad_cz = -0.5 * l  # capture zones center mid-pad, at (+-w/4, 0, -l/2)
    cap_cx = 0.25 * w
    inv_tx2 = 1.0 / (2.0 * (0.25 * w + 0.5 * sigma) ** 2)
    inv_ty2 = 1.0 / (2.0 * (0.5 * t + 0.5 * sigma) ** 2)
    inv_tz2 = 1.0 / (2.0 * (0.5 * l + 0.5 * sigma) ** 2)
    for b in prange(n_poses):
        qw, qx, qy, qz = quats[b, 0], quats[b, 1], quats[b, 2], quats[b, 3]
        r00 = 1.0 - 2.0 * (qy * qy + qz * qz)
        r01 = 2.0 * (qx * qy - qw * qz)
        r02 = 2.0 * (qx * qz + qw * qy)
        r10 = 2.0 * (qx * qy + qw * qz)
        r11 = 1.0 - 2.0 * (qx * qx + qz * qz)
        r12 = 2.0 * (qy * qz - qw * qx)
        r20 = 2.0 * (qx * qz - qw * qy)
        r21 = 2.0 * (qy * qz + qw * qx)
        r22 = 1.0 - 2.0 * (qx * qx + qy * qy)
        tx, ty, tz = trans[b, 0], trans[b, 1], trans[b, 2]

        dmin = 1e300
        acc = 0.0  # streaming sum of exp((dmin - d_i)/sigma)
        inv_sigma = 1.0 / sigma
        v_sum = 0.0
        s_pos = 0.0
        s_neg = 0.0
        for i in range(n_pts):
            px = pts[i, 0] - tx
            py = pts[i, 1] - ty
            pz = pts[i, 2] - tz
            x = r00 * px + r10 * py + r20 * pz  # R^T (p - t)
            y = r01 * px + r11 * py + r21 * pz
            z = r02 * px + r12 * py + r22 * pz
            ax = abs(x)
            ay = abs(y)

            d = math.sqrt(x * x + y * y + z * z)
            if d < dmin:
                acc = acc * math.exp((d - dmin) * inv_sigma) + 1.0
                dmin = d
            else:
                arg = (dmin - d) * inv_sigma
                if arg > -40.0:  # below this exp underflows anyway
                    acc += math.exp(arg)

            # Finger boxes are mirror images about x=0: one test on |x|.
            rx = t2 - abs(ax - finger_cx)
            ry = t2 - ay
            rz = finger_hz - abs(z + finger_hz)
            if rx > 0.0 and ry > 0.0 and rz > 0.0:
                dep = rx if rx < ry else ry
                if rz < dep:
                    dep = rz
                v_sum += dep
            rx = palm_hx - ax
            rz = palm_hz - abs(z - palm_cz)
            if rx > 0.0 and ry > 0.0 and rz > 0.0:
                dep = rx if rx < ry else ry
                if rz < dep:
                    dep = rz
                v_sum += dep

            # Capture evidence: surface the + (resp. -) pad could close on.
            # A point counts only for the side it sits on, with its outward
            # normal facing that side's pad.
            n_axis = normals[i, 0] * r00 + normals[i, 1] * r10 + normals[i, 2] * r20
            zc = z - pad_cz
            env_arg = y * y * inv_ty2 + zc * zc * inv_tz2
            if env_arg < 40.0:  # beyond this the weight underflows
                if n_axis > 0.0 and x > 0.0:
                    dxc = x - cap_cx
                    arg = env_arg + dxc * dxc * inv_tx2
                    if arg < 40.0:
                        s_pos += n_axis * n_axis * math.exp(-arg)
                elif n_axis < 0.0 and x < 0.0:
                    dxc = x + cap_cx
                    arg = env_arg + dxc * dxc * inv_tx2
                    if arg < 40.0:
                        s_neg += n_axis * n_axis * math.exp(-arg)

        d_term = dmin - sigma * math.log(acc / n_pts)
        if d_term < 0.0:
            d_term = 0.0

        a_term = 1.0 - (s_pos / (1.0 + s_pos)) * (s_neg / (1.0 + s_neg))
        out[b] = w_d * d_term + w_p * v_sum + w_a * a_term
    return out


class AntipodalSurrogateField(EnergyField):
    """Analytic antipodal-contact energy with finite-difference scores."""

    def __init__(
        self,
        gripper: GripperModel | None = None,
        schedule: NoiseSchedule | None = None,
        weights: EnergyWeights | None = None,
    ):
        self.gripper = gripper or GripperModel()
        self.schedule = schedule or make_schedule(10, 0.08, 0.004, 6e-4)
        self.weights = weights or EnergyWeights()

    def evaluate(self, pose: Pose, k: int, cloud: PointCloud) -> float:
        return float(
            self.evaluate_arrays(pose.rotation[None], pose.translation[None], k, cloud)[0]
        )

    def evaluate_arrays(self, quats, trans, k: int, cloud: PointCloud) -> np.ndarray:
        _require_conditioning(cloud)
        sigma = self.schedule.sigma_at(k)
        g = self.gripper
        w = self.weights
        return _energy_kernel(
            np.ascontiguousarray(quats, dtype=float),
            np.ascontiguousarray(trans, dtype=float),
            cloud.points,
            cloud.normals,
            g.max_jaw_width,
            g.finger_thickness,
            g.finger_length,
            g.palm_depth,
            sigma,
            w.w_dist,
            w.w_pen,
            w.w_anti,
        )

    def score(self, pose: Pose, k: int, cloud: PointCloud) -> Twist:
        vec = self.score_arrays(pose.rotation[None], pose.translation[None], k, cloud)[0]
        return Twist.from_vector(vec)

    def score_arrays(self, quats, trans, k: int, cloud: PointCloud) -> np.ndarray:
        return self.fd_score_arrays(quats, trans, k, cloud, self.fd_step(k))

    def fd_step(self, k: int) -> float:
        return max(1e-5, self.schedule.sigma_at(k) * 1e-3)

    def fd_score_arrays(self, quats, trans, k: int, cloud: PointCloud, h: float) -> np.ndarray:
        """Central finite-difference score at explicit step h, shape (B, 6).

        All 12 perturbed evaluations run as one stacked batch.
        """
        quats = np.asarray(quats, float)
        trans = np.asarray(trans, float)
        b = quats.shape[0]
        q_all = np.empty((12, b, 4))
        t_all = np.empty((12, b, 3))
        for j in range(6):
            for s, sign in enumerate((+1.0, -1.0)):
                xi = np.zeros(6)
                xi[j] = sign * h
                dp = se3_exp(Twist.from_vector(xi))
                q_all[2 * j + s] = _left_multiply_quat(dp.rotation, quats)
                t_all[2 * j + s] = trans @ dp.rotation_matrix().T + dp.translation
        energies = self.evaluate_arrays(
            q_all.reshape(12 * b, 4), t_all.reshape(12 * b, 3), k, cloud
        ).reshape(12, b)
        grad = (energies[0::2] - energies[1::2]) / (2 * h)
        return -grad.T


def _left_multiply_quat(qe: np.ndarray, qs: np.ndarray) -> np.ndarray:
    """quat_multiply(qe, q) for every row q of qs."""
    w1, x1, y1, z1 = qe
    w2, x2, y2, z2 = qs[:, 0], qs[:, 1], qs[:, 2], qs[:, 3]
    out = np.empty_like(qs)
    out[:, 0] = w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2
    out[:, 1] = w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2
    out[:, 2] = w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2
    out[:, 3] = w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2
    norms = np.linalg.norm(out, axis=1, keepdims=True)
    return out / norms


def surrogate_energy(
    pose: Pose,
    k: int,
    cloud: PointCloud,
    g: GripperModel,
    sched: NoiseSchedule,
    weights: EnergyWeights | None = None,
) -> float:
    return AntipodalSurrogateField(g, sched, weights).evaluate(pose, k, cloud)


def surrogate_score(
    pose: Pose,
    k: int,
    cloud: PointCloud,
    g: GripperModel,
    sched: NoiseSchedule,
    weights: EnergyWeights | None = None,
) -> Twist:
    return AntipodalSurrogateField(g, sched, weights).score(pose, k, cloud)
