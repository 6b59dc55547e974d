"""Per-frame ground-truth normals from point clouds via RANSAC plane fits.

The cloud is projected into the camera to keep only points that land on
ground-labelled pixels, then a plane is fit to the survivors. Segmentation
masks are an input here, not something this package computes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from groundline.errors import DegenerateInputError, LowInlierWarning
from groundline.geom import Transform

LOW_INLIER_RATIO = 0.5


@dataclass(frozen=True)
class PlaneFit:
    """Plane n.x = d with |n| = 1; d in meters."""

    normal: np.ndarray
    offset: float
    inlier_count: int
    inlier_ratio: float


def select_ground_points(
    points: np.ndarray,
    intrinsics,
    cam_from_lidar: Transform,
    mask: np.ndarray,
) -> np.ndarray:
    """Keep points that project onto ground pixels; returns them in the camera frame.

    A point survives when its camera-frame depth is positive, its pixel
    lands inside the image, and the mask is true there. The mask shape
    must match the intrinsics' height and width.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (intrinsics.height, intrinsics.width):
        raise ValueError(
            f"mask shape {mask.shape} does not match image "
            f"{(intrinsics.height, intrinsics.width)}"
        )
    cam_pts = points @ cam_from_lidar.rotation.T + cam_from_lidar.translation
    z = cam_pts[:, 2]
    keep = z > 0.0
    u = np.full(points.shape[0], -1.0)
    v = np.full(points.shape[0], -1.0)
    u[keep] = intrinsics.fx * cam_pts[keep, 0] / z[keep] + intrinsics.cx
    v[keep] = intrinsics.fy * cam_pts[keep, 1] / z[keep] + intrinsics.cy
    cols = np.floor(u).astype(int)
    rows = np.floor(v).astype(int)
    keep &= (cols >= 0) & (cols < intrinsics.width) & (rows >= 0) & (rows < intrinsics.height)
    idx = np.flatnonzero(keep)
    on_ground = mask[rows[idx], cols[idx]]
    return cam_pts[idx[on_ground]]


def _refine_plane(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares plane through the centroid (smallest singular direction)."""
    centroid = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centroid, full_matrices=False)
    normal = vt[-1]
    return normal, float(normal @ centroid)


def ransac_plane(
    points: np.ndarray,
    threshold: float = 0.03,
    iterations: int = 200,
    seed: int = 0,
    up=(0.0, 1.0, 0.0),
) -> PlaneFit:
    """Consensus plane fit, deterministic for a given seed.

    Minimal samples of 3 points propose planes; the largest consensus set
    is refined by least squares. The refined plane is kept only if it does
    not lose inliers against the best sampled candidate. The normal is
    flipped so its dot product with `up` is positive.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = points.shape[0]
    if n < 3:
        raise DegenerateInputError(f"plane fit needs >= 3 points, got {n}")
    if np.linalg.matrix_rank(points - points.mean(axis=0), tol=1e-12) < 2:
        raise DegenerateInputError("all points are collinear")

    rng = np.random.default_rng(seed)
    best_count = -1
    best_normal = None
    best_offset = 0.0
    for _ in range(iterations):
        i, j, k = rng.choice(n, size=3, replace=False)
        normal = np.cross(points[j] - points[i], points[k] - points[i])
        norm = np.linalg.norm(normal)
        if norm < 1e-12:
            continue
        normal = normal / norm
        offset = float(normal @ points[i])
        count = int(np.count_nonzero(np.abs(points @ normal - offset) <= threshold))
        if count > best_count:
            best_count = count
            best_normal = normal
            best_offset = offset
    if best_normal is None:
        raise DegenerateInputError("no non-collinear sample found")

    inliers = np.abs(points @ best_normal - best_offset) <= threshold
    normal, offset = _refine_plane(points[inliers])
    count = int(np.count_nonzero(np.abs(points @ normal - offset) <= threshold))
    if count < best_count:
        normal, offset, count = best_normal, best_offset, best_count

    if normal @ np.asarray(up, dtype=np.float64) < 0.0:
        normal = -normal
        offset = -offset

    ratio = count / n
    if ratio < LOW_INLIER_RATIO:
        warnings.warn(
            f"plane consensus covers only {ratio:.1%} of points; "
            "ground truth quality is degraded",
            LowInlierWarning,
            stacklevel=2,
        )
    return PlaneFit(normal=normal, offset=offset, inlier_count=count, inlier_ratio=ratio)


def fit_ground_normal(
    points: np.ndarray,
    intrinsics,
    cam_from_lidar: Transform,
    mask: np.ndarray,
    threshold: float = 0.03,
    iterations: int = 200,
    seed: int = 0,
    up=(0.0, -1.0, 0.0),
) -> PlaneFit:
    """Full per-frame pipeline: select ground points, then fit the plane.

    Default `up` is the camera-frame up direction (-y, KITTI convention).
    """
    selected = select_ground_points(points, intrinsics, cam_from_lidar, mask)
    return ransac_plane(selected, threshold=threshold, iterations=iterations, seed=seed, up=up)
