"""Shared fixtures and oracle helpers.

scipy.spatial.transform.Rotation serves as the independent reference for
all rotation algebra; the package itself never touches scipy.
"""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation as ScipyRotation

from groundline.geom import Transform


def random_rotations(n, seed, max_angle=np.pi - 1e-2):
    """Uniform random axis, uniform angle in [0, max_angle); scipy-built."""
    rng = np.random.default_rng(seed)
    axes = rng.normal(size=(n, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    angles = rng.uniform(0.0, max_angle, size=n)
    return [ScipyRotation.from_rotvec(a * ax).as_matrix() for a, ax in zip(angles, axes)]


def random_transforms(n, seed):
    rng = np.random.default_rng(seed)
    rots = random_rotations(n, seed + 1)
    return [Transform(r, rng.normal(scale=5.0, size=3)) for r in rots]


def geodesic_deg(a, b):
    """Angle in degrees between two rotations (scipy path)."""
    rel = ScipyRotation.from_matrix(a).inv() * ScipyRotation.from_matrix(b)
    return np.degrees(np.linalg.norm(rel.as_rotvec()))


def angle_between_deg(u, v):
    dot = np.clip(
        np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)), -1.0, 1.0
    )
    return np.degrees(np.arccos(dot))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
