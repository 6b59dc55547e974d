# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled SO(3) and filter-step kernels.

Mirrors groundline._kernels._python; results agree to float rounding.
"""

from libc.math cimport sqrt, sin, cos, acos, fabs, M_PI

import numpy as np

from groundline.errors import CovarianceSingularError

BACKEND = "native"

cdef double _SMALL_ANGLE = 1e-8
cdef double _NEAR_PI = M_PI - 1e-4


cdef void _exp_into(double x, double y, double z, double[:, ::1] out) noexcept nogil:
    cdef double theta_sq = x * x + y * y + z * z
    cdef double theta = sqrt(theta_sq)
    cdef double a, b
    if theta < _SMALL_ANGLE:
        a = 1.0 - theta_sq / 6.0 + theta_sq * theta_sq / 120.0
        b = 0.5 - theta_sq / 24.0 + theta_sq * theta_sq / 720.0
    else:
        a = sin(theta) / theta
        b = (1.0 - cos(theta)) / theta_sq
    out[0, 0] = 1.0 - b * (y * y + z * z)
    out[0, 1] = -a * z + b * x * y
    out[0, 2] = a * y + b * x * z
    out[1, 0] = a * z + b * x * y
    out[1, 1] = 1.0 - b * (x * x + z * z)
    out[1, 2] = -a * x + b * y * z
    out[2, 0] = -a * y + b * x * z
    out[2, 1] = a * x + b * y * z
    out[2, 2] = 1.0 - b * (x * x + y * y)


cdef void _log_into(double[:, ::1] rot, double* wx, double* wy, double* wz) noexcept nogil:
    cdef double trace = rot[0, 0] + rot[1, 1] + rot[2, 2]
    cdef double cos_theta = (trace - 1.0) * 0.5
    if cos_theta > 1.0:
        cos_theta = 1.0
    elif cos_theta < -1.0:
        cos_theta = -1.0
    cdef double theta = acos(cos_theta)
    cdef double vx = rot[2, 1] - rot[1, 2]
    cdef double vy = rot[0, 2] - rot[2, 0]
    cdef double vz = rot[1, 0] - rot[0, 1]
    cdef double factor, denom, ax, ay, az, norm
    cdef int i
    if theta < _SMALL_ANGLE:
        factor = 0.5 * (1.0 + theta * theta / 6.0)
        wx[0] = factor * vx
        wy[0] = factor * vy
        wz[0] = factor * vz
        return
    if theta > _NEAR_PI:
        denom = 1.0 - cos_theta
        # Column of (sym - cos I)/(1 - cos) with the largest diagonal entry.
        if rot[0, 0] >= rot[1, 1] and rot[0, 0] >= rot[2, 2]:
            i = 0
        elif rot[1, 1] >= rot[2, 2]:
            i = 1
        else:
            i = 2
        if i == 0:
            ax = (rot[0, 0] - cos_theta) / denom
            ay = 0.5 * (rot[1, 0] + rot[0, 1]) / denom
            az = 0.5 * (rot[2, 0] + rot[0, 2]) / denom
            norm = sqrt(ax if ax > 0.0 else 1e-300)
            ax = norm
            ay /= norm
            az /= norm
        elif i == 1:
            ax = 0.5 * (rot[0, 1] + rot[1, 0]) / denom
            ay = (rot[1, 1] - cos_theta) / denom
            az = 0.5 * (rot[2, 1] + rot[1, 2]) / denom
            norm = sqrt(ay if ay > 0.0 else 1e-300)
            ax /= norm
            ay = norm
            az /= norm
        else:
            ax = 0.5 * (rot[0, 2] + rot[2, 0]) / denom
            ay = 0.5 * (rot[1, 2] + rot[2, 1]) / denom
            az = (rot[2, 2] - cos_theta) / denom
            norm = sqrt(az if az > 0.0 else 1e-300)
            ax /= norm
            ay /= norm
            az = norm
        norm = sqrt(ax * ax + ay * ay + az * az)
        ax /= norm
        ay /= norm
        az /= norm
        if ax * vx + ay * vy + az * vz < 0.0:
            ax = -ax
            ay = -ay
            az = -az
        wx[0] = theta * ax
        wy[0] = theta * ay
        wz[0] = theta * az
        return
    factor = 0.5 * theta / sin(theta)
    wx[0] = factor * vx
    wy[0] = factor * vy
    wz[0] = factor * vz


def so3_exp(w):
    """Rodrigues map from an axis-angle vector to a rotation matrix."""
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64).reshape(3)
    out = np.empty((3, 3))
    cdef double[:, ::1] ov = out
    _exp_into(wv[0], wv[1], wv[2], ov)
    return out


def so3_log(rot):
    """Inverse of so3_exp; canonical output magnitude lies in [0, pi]."""
    cdef double[:, ::1] rv = np.ascontiguousarray(rot, dtype=np.float64).reshape(3, 3)
    out = np.empty(3)
    cdef double[::1] ov = out
    _log_into(rv, &ov[0], &ov[1], &ov[2])
    return out


def iekf_update(estimate, cov, observation, double meas_var):
    """One left-invariant measurement update on SO(3).

    Innovation is log(estimate^-1 observation); the correction is applied
    multiplicatively on the right. Returns (new_estimate, new_covariance)
    with the covariance re-symmetrized.
    """
    cdef double[:, ::1] est = np.ascontiguousarray(estimate, dtype=np.float64).reshape(3, 3)
    cdef double[:, ::1] c = np.ascontiguousarray(cov, dtype=np.float64).reshape(3, 3)
    cdef double[:, ::1] obs = np.ascontiguousarray(observation, dtype=np.float64).reshape(3, 3)

    new_est_arr = np.empty((3, 3))
    new_cov_arr = np.empty((3, 3))
    scratch = np.empty((3, 3))
    cdef double[:, ::1] new_est = new_est_arr
    cdef double[:, ::1] new_cov = new_cov_arr
    cdef double[:, ::1] work = scratch

    cdef double s[9]          # innovation covariance
    cdef double sinv[9]
    cdef double k[9]          # gain
    cdef double tmp[9]
    cdef double nu0, nu1, nu2, g0, g1, g2, det
    cdef int i, j, l

    for i in range(3):
        for j in range(3):
            work[i, j] = est[0, i] * obs[0, j] + est[1, i] * obs[1, j] + est[2, i] * obs[2, j]
    _log_into(work, &nu0, &nu1, &nu2)

    for i in range(3):
        for j in range(3):
            s[3 * i + j] = c[i, j] + (meas_var if i == j else 0.0)

    det = (
        s[0] * (s[4] * s[8] - s[5] * s[7])
        - s[1] * (s[3] * s[8] - s[5] * s[6])
        + s[2] * (s[3] * s[7] - s[4] * s[6])
    )
    if fabs(det) < 1e-300:
        raise CovarianceSingularError("innovation covariance not invertible")
    sinv[0] = (s[4] * s[8] - s[5] * s[7]) / det
    sinv[1] = (s[2] * s[7] - s[1] * s[8]) / det
    sinv[2] = (s[1] * s[5] - s[2] * s[4]) / det
    sinv[3] = (s[5] * s[6] - s[3] * s[8]) / det
    sinv[4] = (s[0] * s[8] - s[2] * s[6]) / det
    sinv[5] = (s[2] * s[3] - s[0] * s[5]) / det
    sinv[6] = (s[3] * s[7] - s[4] * s[6]) / det
    sinv[7] = (s[1] * s[6] - s[0] * s[7]) / det
    sinv[8] = (s[0] * s[4] - s[1] * s[3]) / det

    for i in range(3):
        for j in range(3):
            k[3 * i + j] = 0.0
            for l in range(3):
                k[3 * i + j] += c[i, l] * sinv[3 * l + j]

    g0 = k[0] * nu0 + k[1] * nu1 + k[2] * nu2
    g1 = k[3] * nu0 + k[4] * nu1 + k[5] * nu2
    g2 = k[6] * nu0 + k[7] * nu1 + k[8] * nu2

    _exp_into(g0, g1, g2, work)
    for i in range(3):
        for j in range(3):
            new_est[i, j] = (
                est[i, 0] * work[0, j]
                + est[i, 1] * work[1, j]
                + est[i, 2] * work[2, j]
            )

    # (I - K) C, then re-symmetrize.
    for i in range(3):
        for j in range(3):
            tmp[3 * i + j] = (1.0 if i == j else 0.0) - k[3 * i + j]
    for i in range(3):
        for j in range(3):
            new_cov[i, j] = (
                tmp[3 * i] * c[0, j] + tmp[3 * i + 1] * c[1, j] + tmp[3 * i + 2] * c[2, j]
            )
    for i in range(3):
        for j in range(i + 1, 3):
            det = 0.5 * (new_cov[i, j] + new_cov[j, i])
            new_cov[i, j] = det
            new_cov[j, i] = det

    return new_est_arr, new_cov_arr
