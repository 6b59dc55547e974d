"""Fixed-size SO(3)/SE(3) algebra used by the filter and estimators.

Conventions:
  - Rotations are 3x3 row-major numpy arrays; tangent vectors live in so(3)
    as axis-angle 3-vectors (magnitude = angle, radians).
  - Euler order is yaw(y) * pitch(x) * roll(z), applied right to left, so
    pitch is the dominant driver of the rotation's second column.
  - The sensor frame has y up and z forward; the ground normal of an
    upright sensor is the rotation's second column (0, 1, 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from groundline import _kernels
from groundline.errors import GimbalLockError

_GIMBAL_MARGIN = 1e-9


def rot_x(angle: float) -> np.ndarray:
    """Rotation about the x axis (pitch axis)."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    """Rotation about the y axis (yaw axis)."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    """Rotation about the z axis (roll axis)."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def exp(omega) -> np.ndarray:
    """Axis-angle vector to rotation matrix (Rodrigues); exp(0) is identity."""
    return _kernels.so3_exp(np.asarray(omega, dtype=np.float64).reshape(3))


def log(rot) -> np.ndarray:
    """Rotation matrix to canonical axis-angle vector, magnitude in [0, pi]."""
    return _kernels.so3_log(np.asarray(rot, dtype=np.float64).reshape(3, 3))


def is_rotation(rot, tol: float = 1e-9) -> bool:
    """True when rot is orthonormal with unit determinant within tol."""
    rot = np.asarray(rot, dtype=np.float64)
    if rot.shape != (3, 3):
        return False
    if not np.all(np.abs(rot @ rot.T - np.eye(3)) < tol):
        return False
    return abs(np.linalg.det(rot) - 1.0) < tol


def project_to_rotation(mat) -> np.ndarray:
    """Nearest rotation matrix in the Frobenius sense (via SVD)."""
    u, _, vt = np.linalg.svd(np.asarray(mat, dtype=np.float64).reshape(3, 3))
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def orthonormalize(rot) -> np.ndarray:
    """Gram-Schmidt repair for drift accumulated over long compose chains."""
    rot = np.asarray(rot, dtype=np.float64)
    r0 = rot[:, 0] / np.linalg.norm(rot[:, 0])
    r1 = rot[:, 1] - (r0 @ rot[:, 1]) * r0
    r1 /= np.linalg.norm(r1)
    r2 = np.cross(r0, r1)
    return np.column_stack([r0, r1, r2])


@dataclass(frozen=True)
class Transform:
    """Rigid transform: rotation plus translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(
            self, "rotation", np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        )
        object.__setattr__(
            self,
            "translation",
            np.asarray(self.translation, dtype=np.float64).reshape(3),
        )

    @staticmethod
    def identity() -> "Transform":
        return Transform(np.eye(3), np.zeros(3))


def compose(a: Transform, b: Transform) -> Transform:
    """Group product a * b (apply b first in the moving-frame convention)."""
    return Transform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def inverse(t: Transform) -> Transform:
    rt = t.rotation.T
    return Transform(rt, -(rt @ t.translation))


@dataclass(frozen=True)
class EulerAngles:
    """roll about z, pitch about x, yaw about y; each in (-pi, pi], radians."""

    roll: float
    pitch: float
    yaw: float


def rotation_from_euler(e: EulerAngles) -> np.ndarray:
    """Compose R = R_y(yaw) * R_x(pitch) * R_z(roll)."""
    return rot_y(e.yaw) @ rot_x(e.pitch) @ rot_z(e.roll)


def euler_from_rotation(rot) -> EulerAngles:
    """Decompose under the yaw*pitch*roll convention.

    Raises GimbalLockError when |sin(pitch)| >= 1 - 1e-9, where roll and
    yaw become indistinguishable.
    """
    rot = np.asarray(rot, dtype=np.float64)
    sin_pitch = -rot[1, 2]
    if abs(sin_pitch) >= 1.0 - _GIMBAL_MARGIN:
        raise GimbalLockError(f"pitch magnitude at gimbal lock: sin(pitch)={sin_pitch}")
    pitch = float(np.arcsin(sin_pitch))
    roll = float(np.arctan2(rot[1, 0], rot[1, 1]))
    yaw = float(np.arctan2(rot[0, 2], rot[2, 2]))
    return EulerAngles(roll=roll, pitch=pitch, yaw=yaw)


def normal_column(rot) -> np.ndarray:
    """Second column of the rotation, re-normalized to a unit vector.

    For a residual rotation this is the ground plane normal seen from the
    sensor frame.
    """
    col = np.asarray(rot, dtype=np.float64)[:, 1]
    return col / np.linalg.norm(col)
