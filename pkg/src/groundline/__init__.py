"""Ground plane normal estimation from vehicle ego-motion.

An invariant extended Kalman filter on SO(3) splits ego-motion into the
slow "ideal vehicle" orientation and the fast oscillation around it; the
residual rotation's second column is the per-frame ground plane normal.
Ships with odometry-only baselines, LiDAR ground-truth fitting, error
metrics, IPM/vanishing-line utilities and a synthetic trajectory
simulator for dataset-free verification.
"""

from groundline._kernels import BACKEND as KERNEL_BACKEND
from groundline.estimator import (
    ExtrinsicCalibration,
    NormalEstimate,
    OdometrySequence,
    SequenceKind,
    accumulate,
    baseline_absolute,
    baseline_constant,
    baseline_relative,
    differentiate,
    estimate_normals,
)
from groundline.filter import FilterParams, FilterState
from groundline.geom import Transform
from groundline.metrics import angular_error, dynamics_stats
from groundline.sim import SimConfig, simulate

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "ExtrinsicCalibration",
    "FilterParams",
    "FilterState",
    "NormalEstimate",
    "OdometrySequence",
    "SequenceKind",
    "SimConfig",
    "Transform",
    "accumulate",
    "angular_error",
    "baseline_absolute",
    "baseline_constant",
    "baseline_relative",
    "differentiate",
    "dynamics_stats",
    "estimate_normals",
    "simulate",
]
