"""Angular error between normal streams and ground-dynamics statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from groundline.errors import LengthMismatchError

HISTOGRAM_BUCKET_DEG = 0.25


@dataclass(frozen=True)
class ErrorReport:
    """Mean angular error over counted frames (burn-in already excluded)."""

    mean_error_rad: float
    mean_error_deg: float
    per_frame_errors: np.ndarray  # radians, one per counted frame
    frames_counted: int

    def to_dict(self) -> dict:
        return {
            "mean_error_rad": self.mean_error_rad,
            "mean_error_deg": self.mean_error_deg,
            "frames_counted": self.frames_counted,
            "per_frame_errors_rad": [float(e) for e in self.per_frame_errors],
        }


@dataclass(frozen=True)
class DynamicsStats:
    """Per-axis deviation statistics of ground normals against the static one.

    Means and stds are over absolute deviations in degrees; histograms
    bucket |deviation| in 0.25 degree steps and sum to the frame count.
    """

    pitch_mean: float
    pitch_std: float
    roll_mean: float
    roll_std: float
    pitch_histogram: tuple[int, ...]
    roll_histogram: tuple[int, ...]
    frames: int

    def to_dict(self) -> dict:
        return {
            "pitch_mean_deg": self.pitch_mean,
            "pitch_std_deg": self.pitch_std,
            "roll_mean_deg": self.roll_mean,
            "roll_std_deg": self.roll_std,
            "bucket_width_deg": HISTOGRAM_BUCKET_DEG,
            "pitch_histogram": list(self.pitch_histogram),
            "roll_histogram": list(self.roll_histogram),
            "frames": self.frames,
        }


def _unit_rows(vectors) -> np.ndarray:
    arr = np.asarray(vectors, dtype=np.float64).reshape(-1, 3)
    return arr / np.linalg.norm(arr, axis=1, keepdims=True)


def angular_error(est, gt, burn_in: int = 0) -> ErrorReport:
    """Per-frame arccos of the clamped dot product, averaged.

    The first `burn_in` frames of both streams are excluded from the
    report. Lengths must match before exclusion.
    """
    est = _unit_rows(est)
    gt = _unit_rows(gt)
    if est.shape[0] != gt.shape[0]:
        raise LengthMismatchError(
            f"estimated {est.shape[0]} frames vs ground truth {gt.shape[0]}"
        )
    est = est[burn_in:]
    gt = gt[burn_in:]
    dots = np.clip(np.sum(est * gt, axis=1), -1.0, 1.0)
    errors = np.arccos(dots)
    mean = float(errors.mean()) if errors.size else 0.0
    return ErrorReport(
        mean_error_rad=mean,
        mean_error_deg=float(np.degrees(mean)),
        per_frame_errors=errors,
        frames_counted=int(errors.size),
    )


def _alignment_to_up(static_normal: np.ndarray) -> np.ndarray:
    """Minimal rotation carrying static_normal onto (0, 1, 0)."""
    up = np.array([0.0, 1.0, 0.0])
    v = np.cross(static_normal, up)
    c = float(static_normal @ up)
    s = np.linalg.norm(v)
    if s < 1e-12:
        if c > 0.0:
            return np.eye(3)
        # Antipodal: rotate half a turn about x.
        return np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx * ((1.0 - c) / (s * s))


def dynamics_stats(gt_normals, static_normal) -> DynamicsStats:
    """Decompose per-frame normal deviations into pitch and roll degrees.

    In the frame where the static normal is straight up, the deviation
    splits as pitch = atan2(n_z, n_y) and roll = atan2(-n_x, n_y), which
    reduces to the Euler pitch/roll for the small angles that matter here.
    """
    normals = _unit_rows(gt_normals)
    static = _unit_rows(static_normal)[0]
    aligned = normals @ _alignment_to_up(static).T
    pitch = np.degrees(np.arctan2(aligned[:, 2], aligned[:, 1]))
    roll = np.degrees(np.arctan2(-aligned[:, 0], aligned[:, 1]))

    def _hist(values: np.ndarray) -> tuple[int, ...]:
        magnitudes = np.abs(values)
        buckets = int(np.floor(magnitudes.max() / HISTOGRAM_BUCKET_DEG)) + 1 if values.size else 1
        edges = np.arange(buckets + 1) * HISTOGRAM_BUCKET_DEG
        counts, _ = np.histogram(magnitudes, bins=edges)
        return tuple(int(c) for c in counts)

    return DynamicsStats(
        pitch_mean=float(np.abs(pitch).mean()),
        pitch_std=float(np.abs(pitch).std()),
        roll_mean=float(np.abs(roll).mean()),
        roll_std=float(np.abs(roll).std()),
        pitch_histogram=_hist(pitch),
        roll_histogram=_hist(roll),
        frames=int(normals.shape[0]),
    )
