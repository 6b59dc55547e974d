"""Pure numpy kernels; semantics match the compiled versions bit-for-bit
wherever the same branch thresholds apply.
"""

import numpy as np

from groundline.errors import CovarianceSingularError

BACKEND = "python"

_SMALL_ANGLE = 1e-8
_NEAR_PI = np.pi - 1e-4


def so3_exp(w):
    """Rodrigues map from an axis-angle vector to a rotation matrix."""
    w = np.asarray(w, dtype=np.float64).reshape(3)
    x, y, z = w
    theta_sq = x * x + y * y + z * z
    theta = np.sqrt(theta_sq)
    if theta < _SMALL_ANGLE:
        # Taylor branches keep exp smooth through theta = 0.
        a = 1.0 - theta_sq / 6.0 + theta_sq * theta_sq / 120.0
        b = 0.5 - theta_sq / 24.0 + theta_sq * theta_sq / 720.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta_sq
    return np.array(
        [
            [1.0 - b * (y * y + z * z), -a * z + b * x * y, a * y + b * x * z],
            [a * z + b * x * y, 1.0 - b * (x * x + z * z), -a * x + b * y * z],
            [-a * y + b * x * z, a * x + b * y * z, 1.0 - b * (x * x + y * y)],
        ]
    )


def so3_log(rot):
    """Inverse of so3_exp; canonical output magnitude lies in [0, pi]."""
    rot = np.asarray(rot, dtype=np.float64).reshape(3, 3)
    trace = rot[0, 0] + rot[1, 1] + rot[2, 2]
    cos_theta = min(1.0, max(-1.0, (trace - 1.0) * 0.5))
    theta = np.arccos(cos_theta)
    vee = np.array(
        [rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0], rot[1, 0] - rot[0, 1]]
    )
    if theta < _SMALL_ANGLE:
        factor = 0.5 * (1.0 + theta * theta / 6.0)
        return factor * vee
    if theta > _NEAR_PI:
        # Largest-diagonal branch: near pi the antisymmetric part vanishes,
        # but K K^T = (S - cos I) / (1 - cos) stays well conditioned.
        sym = 0.5 * (rot + rot.T)
        m = (sym - cos_theta * np.eye(3)) / (1.0 - cos_theta)
        i = int(np.argmax(np.diag(m)))
        axis = m[:, i] / np.sqrt(max(m[i, i], 1e-300))
        axis /= np.linalg.norm(axis)
        if axis @ vee < 0.0:
            axis = -axis
        return theta * axis
    return (0.5 * theta / np.sin(theta)) * vee


def iekf_update(estimate, cov, observation, meas_var):
    """One left-invariant measurement update on SO(3).

    Innovation is log(estimate^-1 observation); the correction is applied
    multiplicatively on the right. Returns (new_estimate, new_covariance)
    with the covariance re-symmetrized.
    """
    estimate = np.asarray(estimate, dtype=np.float64).reshape(3, 3)
    cov = np.asarray(cov, dtype=np.float64).reshape(3, 3)
    observation = np.asarray(observation, dtype=np.float64).reshape(3, 3)

    nu = so3_log(estimate.T @ observation)
    s = cov + meas_var * np.eye(3)
    try:
        gain = np.linalg.solve(s.T, cov.T).T
    except np.linalg.LinAlgError as exc:
        raise CovarianceSingularError("innovation covariance not invertible") from exc
    new_estimate = estimate @ so3_exp(gain @ nu)
    new_cov = (np.eye(3) - gain) @ cov
    new_cov = 0.5 * (new_cov + new_cov.T)
    return new_estimate, new_cov
