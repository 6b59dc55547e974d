"""Inverse perspective mapping and vanishing-line utilities.

Camera convention: x right, y down, z forward (KITTI camera frame), so the
up direction over the ground is -y. Normals produced by the estimator live
in the sensor frame (y up, z forward); convert them at this boundary with
camera_normal_from_sensor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SENSOR_TO_CAMERA = np.diag([-1.0, -1.0, 1.0])


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole parameters in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class GroundPlane:
    """Ground plane in the camera frame: unit normal pointing up toward the
    camera side, and the perpendicular camera-to-plane distance in meters.
    Points X on the plane satisfy normal . X = -height.
    """

    normal: np.ndarray
    height: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=np.float64).reshape(3)
        object.__setattr__(self, "normal", n / np.linalg.norm(n))
        if not self.height > 0:
            raise ValueError("camera height must be positive")


def camera_normal_from_sensor(normal) -> np.ndarray:
    """Sensor frame (y up, z forward) to camera frame (y down, z forward)."""
    return _SENSOR_TO_CAMERA @ np.asarray(normal, dtype=np.float64).reshape(3)


def sensor_normal_from_camera(normal) -> np.ndarray:
    return _SENSOR_TO_CAMERA @ np.asarray(normal, dtype=np.float64).reshape(3)


def ground_basis(plane: GroundPlane) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(forward, lateral, foot): in-plane axes and the point under the camera.

    Forward is the camera's optical axis projected onto the plane; lateral
    completes it to the camera's right.
    """
    n = plane.normal
    z = np.array([0.0, 0.0, 1.0])
    forward = z - (n @ z) * n
    norm = np.linalg.norm(forward)
    if norm < 1e-9:
        raise ValueError("optical axis is perpendicular to the ground plane")
    forward = forward / norm
    lateral = np.cross(forward, n)
    foot = -plane.height * n
    return forward, lateral, foot


def ipm_homography(intrinsics: CameraIntrinsics, plane: GroundPlane) -> np.ndarray:
    """Homography taking pixel homogeneous coordinates to ground meters.

    Dehomogenizing H (u, v, 1) gives the (forward, lateral) coordinates of
    the pixel ray's intersection with the plane; rays parallel to the
    plane map to points at infinity. Normalized to unit Frobenius norm.
    """
    forward, lateral, _ = ground_basis(plane)
    k_inv = np.linalg.inv(intrinsics.matrix)
    rows = np.vstack(
        [-plane.height * forward, -plane.height * lateral, plane.normal]
    )
    h = rows @ k_inv
    return h / np.linalg.norm(h)


def pixel_to_ground(intrinsics: CameraIntrinsics, plane: GroundPlane, pixel):
    """Explicit ray-plane intersection for one pixel; (forward, lateral) meters.

    Returns None when the ray does not hit the plane in front of the
    camera. Kept separate from the homography so either path can check
    the other.
    """
    u, v = pixel
    direction = np.linalg.solve(intrinsics.matrix, np.array([u, v, 1.0]))
    denom = plane.normal @ direction
    if denom >= -1e-15:
        return None
    lam = -plane.height / denom
    point = lam * direction
    forward, lateral, foot = ground_basis(plane)
    rel = point - foot
    return np.array([forward @ rel, lateral @ rel])


def apply_homography(h: np.ndarray, points) -> np.ndarray:
    """Dehomogenized image of (N, 2) points under a 3x3 homography.

    Points on the line mapped to infinity come back as +-inf, not an error.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    homo = np.hstack([pts, np.ones((pts.shape[0], 1))]) @ h.T
    with np.errstate(divide="ignore", invalid="ignore"):
        return homo[:, :2] / homo[:, 2:3]


def vanishing_line(intrinsics: CameraIntrinsics, normal) -> np.ndarray:
    """Image of the ground plane's horizon: K^-T n, scaled so a^2 + b^2 = 1.

    The line (a, b, c) satisfies a u + b v + c = 0 for every pixel of a
    ray direction parallel to the plane.
    """
    n = np.asarray(normal, dtype=np.float64).reshape(3)
    line = np.linalg.solve(intrinsics.matrix.T, n)
    scale = np.hypot(line[0], line[1])
    if scale < 1e-15:
        raise ValueError("normal is parallel to the optical axis; no finite line")
    line = line / scale
    if line[1] < 0 or (line[1] == 0 and line[0] < 0):
        line = -line
    return line


def bev_grid(extent: float, resolution: float) -> tuple[np.ndarray, int]:
    """Ground coordinates of BEV pixel centers, vehicle at bottom-center.

    Returns ((rows*cols, 2) forward/lateral points, side length in pixels).
    """
    side = int(round(extent / resolution))
    rows = np.arange(side)
    cols = np.arange(side)
    forward = (side - 0.5 - rows) * resolution
    lateral = (cols + 0.5) * resolution - extent / 2.0
    ff, ll = np.meshgrid(forward, lateral, indexing="ij")
    return np.stack([ff.ravel(), ll.ravel()], axis=1), side


def warp_to_bev(
    image: np.ndarray,
    homography: np.ndarray,
    bev_extent: float = 20.0,
    resolution: float = 0.05,
) -> np.ndarray:
    """Inverse-warp an image onto the ground plane, nearest-neighbor.

    The output covers forward in (0, bev_extent] and lateral in
    [-bev_extent/2, bev_extent/2), top row farthest. Samples falling
    outside the source image are zero.
    """
    image = np.asarray(image)
    grid, side = bev_grid(bev_extent, resolution)
    pixels = apply_homography(np.linalg.inv(homography), grid)
    cols = np.round(pixels[:, 0]).astype(int)
    rows = np.round(pixels[:, 1]).astype(int)
    height, width = image.shape[:2]
    valid = (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)
    out_shape = (side, side) + image.shape[2:]
    out = np.zeros(out_shape, dtype=image.dtype)
    flat = out.reshape(side * side, *image.shape[2:])
    flat[valid] = image[rows[valid], cols[valid]]
    return flat.reshape(out_shape)
