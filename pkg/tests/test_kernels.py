import subprocess
import sys

import numpy as np
import pytest

from groundline import _kernels
from groundline._kernels import _python

from conftest import random_rotations

native = pytest.importorskip(
    "groundline._kernels._native", reason="compiled kernels not built"
)


class TestParity:
    def test_exp_matches_python(self):
        rng = np.random.default_rng(20)
        for _ in range(500):
            w = rng.normal(scale=rng.uniform(1e-12, 3.0), size=3)
            np.testing.assert_allclose(
                native.so3_exp(w), _python.so3_exp(w), rtol=0, atol=1e-15
            )

    def test_log_matches_python(self):
        for rot in random_rotations(500, seed=21, max_angle=np.pi - 1e-6):
            np.testing.assert_allclose(
                native.so3_log(rot), _python.so3_log(rot), rtol=0, atol=1e-12
            )

    def test_log_matches_python_near_pi(self):
        rng = np.random.default_rng(22)
        for _ in range(200):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            rot = _python.so3_exp(axis * (np.pi - 1e-5))
            np.testing.assert_allclose(
                native.so3_log(rot), _python.so3_log(rot), rtol=0, atol=1e-10
            )

    def test_iekf_update_matches_python(self):
        rng = np.random.default_rng(23)
        rots = random_rotations(100, seed=24)
        for i in range(0, 100, 2):
            a = rng.normal(size=(3, 3))
            cov = a @ a.T + 0.1 * np.eye(3)
            est_n, cov_n = native.iekf_update(rots[i], cov, rots[i + 1], 0.7)
            est_p, cov_p = _python.iekf_update(rots[i], cov, rots[i + 1], 0.7)
            np.testing.assert_allclose(est_n, est_p, rtol=0, atol=1e-12)
            np.testing.assert_allclose(cov_n, cov_p, rtol=0, atol=1e-12)


class TestSelection:
    def test_default_prefers_native(self):
        assert _kernels.BACKEND == "native"
        assert _kernels.available_backends() == ["python", "native"]

    @pytest.mark.parametrize("requested,expected", [("python", "python"), ("native", "native")])
    def test_env_var_forces_backend(self, requested, expected):
        code = "import groundline._kernels as k; print(k.BACKEND)"
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "GROUNDLINE_KERNELS": requested},
            check=True,
        )
        assert out.stdout.strip() == expected

    def test_bogus_backend_rejected(self):
        code = "import groundline._kernels"
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "GROUNDLINE_KERNELS": "gpu"},
        )
        assert out.returncode != 0
        assert "GROUNDLINE_KERNELS" in out.stderr
