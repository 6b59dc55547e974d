"""Synthetic wheeled-vehicle trajectories with analytically known normals.

The pose orientation splits into a low-frequency part (road grade from a
piecewise-linear profile, about the world x axis) and a high-frequency
oscillation (sinusoidal pitch about x and roll about z in the body frame).
The vehicle rides on the local slope plane, so the ground-truth normal in
the sensor frame depends on the oscillation alone; the slope only moves
the mean orientation the filter has to track.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from groundline import geom
from groundline.errors import InvalidConfigError
from groundline.estimator import OdometrySequence, SequenceKind
from groundline.geom import Transform

_UP = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class SimConfig:
    """Trajectory generator knobs.

    slope_profile is a piecewise-linear road grade in percent versus
    distance in meters, e.g. ((0, 0), (50, 0), (120, 2)) ramps from flat
    to a 2% grade between 50 m and 120 m. Odometry noise is an isotropic
    Gaussian in so(3) applied multiplicatively to each relative rotation;
    drift is a constant per-frame pitch bias (a yaw bias would be
    invisible in the normal).
    """

    frames: int = 1000
    frame_rate: float = 10.0
    pitch_amplitude: float = 1.0  # degrees
    pitch_period: float = 2.0  # seconds
    roll_amplitude: float = 0.0  # degrees
    roll_period: float = 2.0  # seconds
    slope_profile: tuple = ((0.0, 0.0),)  # (distance m, grade %)
    speed: float = 10.0  # m/s
    odometry_noise_std: float = 0.0  # degrees/frame
    drift_rate: float = 0.0  # degrees/frame
    seed: int = 0

    def validate(self) -> None:
        if not isinstance(self.frames, int) or self.frames <= 0:
            raise InvalidConfigError("frames", f"must be a positive integer, got {self.frames}")
        if not self.frame_rate > 0:
            raise InvalidConfigError("frame_rate", f"must be > 0, got {self.frame_rate}")
        for name in ("pitch_amplitude", "roll_amplitude"):
            if getattr(self, name) < 0:
                raise InvalidConfigError(name, f"must be >= 0, got {getattr(self, name)}")
        for name in ("pitch_period", "roll_period"):
            if not getattr(self, name) > 0:
                raise InvalidConfigError(name, f"must be > 0, got {getattr(self, name)}")
        if self.speed < 0:
            raise InvalidConfigError("speed", f"must be >= 0, got {self.speed}")
        if self.odometry_noise_std < 0:
            raise InvalidConfigError(
                "odometry_noise_std", f"must be >= 0, got {self.odometry_noise_std}"
            )
        if not math.isfinite(self.drift_rate):
            raise InvalidConfigError("drift_rate", "must be finite")
        profile = np.asarray(self.slope_profile, dtype=np.float64)
        if profile.ndim != 2 or profile.shape[1] != 2 or profile.shape[0] == 0:
            raise InvalidConfigError(
                "slope_profile", "must be a non-empty list of (distance, grade) pairs"
            )
        if not np.all(np.isfinite(profile)):
            raise InvalidConfigError("slope_profile", "entries must be finite")
        if np.any(np.diff(profile[:, 0]) < 0):
            raise InvalidConfigError("slope_profile", "distances must be non-decreasing")

    def to_json(self) -> str:
        d = asdict(self)
        d["slope_profile"] = [list(p) for p in self.slope_profile]
        return json.dumps(d, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "SimConfig":
        data = json.loads(text)
        known = set(SimConfig.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigError(sorted(unknown)[0], "unknown field")
        if "slope_profile" in data:
            data["slope_profile"] = tuple(tuple(p) for p in data["slope_profile"])
        if "frames" in data and isinstance(data["frames"], float):
            if data["frames"].is_integer():
                data["frames"] = int(data["frames"])
        return SimConfig(**data)


@dataclass(frozen=True)
class SimOutput:
    """Noisy relative odometry plus noise-free poses and normals."""

    odometry: OdometrySequence
    gt_poses: tuple[Transform, ...]
    gt_normals: np.ndarray  # (frames, 3)


def _grade_angle(profile: np.ndarray, distance: float) -> float:
    grade = np.interp(distance, profile[:, 0], profile[:, 1])
    return math.atan(grade / 100.0)


def simulate(config: SimConfig) -> SimOutput:
    """Generate one trajectory; bit-identical for identical configs."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    profile = np.asarray(config.slope_profile, dtype=np.float64)

    amp_pitch = math.radians(config.pitch_amplitude)
    amp_roll = math.radians(config.roll_amplitude)
    noise_std = math.radians(config.odometry_noise_std)
    drift = np.array([math.radians(config.drift_rate), 0.0, 0.0])
    dt = 1.0 / config.frame_rate

    poses = []
    normals = np.empty((config.frames, 3))
    position = np.zeros(3)
    for t in range(config.frames):
        t_s = t * dt
        alpha = _grade_angle(profile, config.speed * t_s)
        theta = amp_pitch * math.sin(2.0 * math.pi * t_s / config.pitch_period)
        phi = amp_roll * math.sin(2.0 * math.pi * t_s / config.roll_period)
        oscillation = geom.rot_x(theta) @ geom.rot_z(phi)
        rotation = geom.rot_x(alpha) @ oscillation
        if t > 0:
            prev_alpha = _grade_angle(profile, config.speed * (t - 1) * dt)
            tangent = geom.rot_x(prev_alpha) @ np.array([0.0, 0.0, 1.0])
            position = position + config.speed * dt * tangent
        poses.append(Transform(rotation, position.copy()))
        normals[t] = oscillation.T @ _UP

    frames = [poses[0]]
    for t in range(1, config.frames):
        rel = geom.compose(geom.inverse(poses[t - 1]), poses[t])
        perturbation = drift + rng.normal(0.0, noise_std, size=3)
        frames.append(Transform(rel.rotation @ geom.exp(perturbation), rel.translation))

    odometry = OdometrySequence(SequenceKind.RELATIVE, tuple(frames), config.frame_rate)
    return SimOutput(odometry=odometry, gt_poses=tuple(poses), gt_normals=normals)
