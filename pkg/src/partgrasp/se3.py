"""SE(3) rigid transforms as unit quaternion + translation, with exp/log maps.

Conventions:
  - Quaternions are (w, x, y, z), renormalized after every construction and
    composition so the unit-norm invariant holds to 1e-9.
  - A Twist stacks (angular, linear); its 6-vector form is
    [wx, wy, wz, vx, vy, vz].
  - Tangent-space perturbations act on the left: perturb(pose, xi) is
    se3_exp(xi) * pose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_SMALL_ANGLE = 1e-8


def _as_vec(v, n: int) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (n,):
        raise ValueError(f"expected length-{n} vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite components")
    return a


@dataclass(frozen=True)
class Twist:
    """Tangent-space element: angular part in radians, linear part in meters."""

    angular: np.ndarray
    linear: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "angular", _as_vec(self.angular, 3))
        object.__setattr__(self, "linear", _as_vec(self.linear, 3))

    @staticmethod
    def zero() -> "Twist":
        return Twist(np.zeros(3), np.zeros(3))

    @staticmethod
    def from_vector(v) -> "Twist":
        v = _as_vec(v, 6)
        return Twist(v[:3], v[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.angular, self.linear])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_vector()))


@dataclass(frozen=True)
class Pose:
    """Rigid transform: world = R(rotation) @ local + translation."""

    rotation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        q = _as_vec(self.rotation, 4)
        n = np.linalg.norm(q)
        if n < 1e-12:
            raise ValueError("zero quaternion")
        q = q / n
        if q[0] < 0.0:  # canonical hemisphere, keeps log single-valued
            q = -q
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", _as_vec(self.translation, 3))

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    def compose(self, other: "Pose") -> "Pose":
        """self * other (apply other first, then self)."""
        q = quat_multiply(self.rotation, other.rotation)
        t = self.apply_point(other.translation)
        return Pose(q, t)

    def inverse(self) -> "Pose":
        qc = np.array([self.rotation[0], *(-self.rotation[1:])])
        return Pose(qc, -quat_rotate(qc, self.translation))

    def apply_point(self, p) -> np.ndarray:
        return quat_rotate(self.rotation, _as_vec(p, 3)) + self.translation

    def apply_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts @ self.rotation_matrix().T + self.translation

    def rotate_vectors(self, vecs: np.ndarray) -> np.ndarray:
        return np.asarray(vecs, dtype=float) @ self.rotation_matrix().T

    def rotation_angle(self) -> float:
        """Rotation angle in [0, pi]."""
        w = min(1.0, abs(float(self.rotation[0])))
        return 2.0 * math.acos(w)

    def allclose(self, other: "Pose", atol: float = 1e-9) -> bool:
        dq = min(
            np.abs(self.rotation - other.rotation).max(),
            np.abs(self.rotation + other.rotation).max(),
        )
        return dq <= atol and np.abs(self.translation - other.translation).max() <= atol


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]
    )


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    w, qv = q[0], q[1:]
    t = 2.0 * np.cross(qv, v)
    return v + w * t + np.cross(qv, t)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quats_to_matrices(qs: np.ndarray) -> np.ndarray:
    """Batched quaternion-to-rotation-matrix, qs shape (B, 4) -> (B, 3, 3)."""
    w, x, y, z = qs[:, 0], qs[:, 1], qs[:, 2], qs[:, 3]
    m = np.empty((qs.shape[0], 3, 3))
    m[:, 0, 0] = 1 - 2 * (y * y + z * z)
    m[:, 0, 1] = 2 * (x * y - w * z)
    m[:, 0, 2] = 2 * (x * z + w * y)
    m[:, 1, 0] = 2 * (x * y + w * z)
    m[:, 1, 1] = 1 - 2 * (x * x + z * z)
    m[:, 1, 2] = 2 * (y * z - w * x)
    m[:, 2, 0] = 2 * (x * z - w * y)
    m[:, 2, 1] = 2 * (y * z + w * x)
    m[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0.0]])


def _left_jacobian(omega: np.ndarray) -> np.ndarray:
    """V matrix: translation part of exp is V(omega) @ linear."""
    theta = np.linalg.norm(omega)
    K = _skew(omega)
    if theta < _SMALL_ANGLE:
        return np.eye(3) + 0.5 * K + K @ K / 6.0
    a = (1.0 - math.cos(theta)) / theta**2
    b = (theta - math.sin(theta)) / theta**3
    return np.eye(3) + a * K + b * (K @ K)


def _left_jacobian_inv(omega: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(omega)
    K = _skew(omega)
    if theta < _SMALL_ANGLE:
        return np.eye(3) - 0.5 * K + K @ K / 12.0
    # c = (1 - theta*sin/(2*(1-cos))) / theta^2, stable away from theta=0
    half = 0.5 * theta
    cot_half = math.cos(half) / math.sin(half)
    c = (1.0 - half * cot_half) / theta**2
    return np.eye(3) - 0.5 * K + c * (K @ K)


def se3_exp(xi: Twist) -> Pose:
    """Exponential map from a twist to a pose (small-angle safe)."""
    omega = xi.angular
    theta = float(np.linalg.norm(omega))
    if theta < _SMALL_ANGLE:
        q = np.array([1.0, 0.5 * omega[0], 0.5 * omega[1], 0.5 * omega[2]])
    else:
        axis = omega / theta
        half = 0.5 * theta
        q = np.concatenate([[math.cos(half)], math.sin(half) * axis])
    t = _left_jacobian(omega) @ xi.linear
    return Pose(q, t)


def se3_log(p: Pose) -> Twist:
    """Principal-branch logarithm; inverse of se3_exp for angle < pi."""
    q = p.rotation
    w = min(1.0, max(-1.0, float(q[0])))
    vec = q[1:]
    s = float(np.linalg.norm(vec))
    theta = 2.0 * math.atan2(s, w)
    if s < _SMALL_ANGLE:
        omega = 2.0 * vec  # first-order: q ~ (1, omega/2)
    else:
        omega = (theta / s) * vec
    v = _left_jacobian_inv(omega) @ p.translation
    return Twist(omega, v)


def se3_exp_many(xis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched exponential map: xis (B, 6) -> (quaternions (B, 4), translations (B, 3))."""
    xis = np.asarray(xis, dtype=float)
    omega = xis[:, :3]
    v = xis[:, 3:]
    theta = np.linalg.norm(omega, axis=1)
    small = theta < _SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    half = 0.5 * theta

    quats = np.empty((len(xis), 4))
    sinc_half = np.where(small, 0.5, np.sin(half) / safe)
    quats[:, 0] = np.cos(half)
    quats[:, 1:] = omega * sinc_half[:, None]

    K = np.zeros((len(xis), 3, 3))
    K[:, 0, 1] = -omega[:, 2]
    K[:, 0, 2] = omega[:, 1]
    K[:, 1, 0] = omega[:, 2]
    K[:, 1, 2] = -omega[:, 0]
    K[:, 2, 0] = -omega[:, 1]
    K[:, 2, 1] = omega[:, 0]
    a = np.where(small, 0.5, (1.0 - np.cos(theta)) / safe**2)
    b = np.where(small, 1.0 / 6.0, (theta - np.sin(theta)) / safe**3)
    V = np.eye(3)[None] + a[:, None, None] * K + b[:, None, None] * (K @ K)
    trans = np.einsum("bij,bj->bi", V, v)
    return quats, trans


def compose_many(q1: np.ndarray, t1: np.ndarray, q2: np.ndarray, t2: np.ndarray):
    """Batched pose composition (q1,t1) * (q2,t2); both operands (B, .)."""
    w1, x1, y1, z1 = q1[:, 0], q1[:, 1], q1[:, 2], q1[:, 3]
    w2, x2, y2, z2 = q2[:, 0], q2[:, 1], q2[:, 2], q2[:, 3]
    q = np.empty_like(q1)
    q[:, 0] = w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2
    q[:, 1] = w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2
    q[:, 2] = w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2
    q[:, 3] = w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    t = np.einsum("bij,bj->bi", quats_to_matrices(q1), t2) + t1
    return q, t


def rotation_near_pi(p: Pose, tol: float = 1e-6) -> bool:
    """True when the rotation angle is within tol of pi (log branch degenerate)."""
    return abs(p.rotation_angle() - math.pi) < tol


def perturb(pose: Pose, xi: Twist) -> Pose:
    """Left-multiplicative tangent update: se3_exp(xi) * pose."""
    return se3_exp(xi).compose(pose)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random unit quaternion (normalized 4D Gaussian)."""
    q = rng.standard_normal(4)
    return q / np.linalg.norm(q)
