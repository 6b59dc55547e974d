import numpy as np
import pytest

from groundline import geom
from groundline.errors import AlreadyAbsoluteError, AlreadyRelativeError, EmptySequenceError
from groundline.estimator import (
    ExtrinsicCalibration,
    OdometrySequence,
    SequenceKind,
    accumulate,
    baseline_absolute,
    baseline_constant,
    baseline_relative,
    differentiate,
    estimate_normals,
)
from groundline.geom import Transform
from groundline.metrics import angular_error
from groundline.sim import SimConfig, simulate

from conftest import angle_between_deg, random_transforms

UP = np.array([0.0, 1.0, 0.0])


def relative_seq(frames):
    return OdometrySequence(SequenceKind.RELATIVE, tuple(frames))


def absolute_seq(frames):
    return OdometrySequence(SequenceKind.ABSOLUTE, tuple(frames))


def mean_error_deg(estimates, gt_normals, burn_in=20):
    return angular_error(
        [e.normal for e in estimates], gt_normals, burn_in=burn_in
    ).mean_error_deg


class TestAccumulate:
    def test_identity_chain(self):
        seq = accumulate(relative_seq([Transform.identity()] * 3))
        assert seq.kind is SequenceKind.ABSOLUTE
        for t in seq.frames:
            np.testing.assert_array_equal(t.rotation, np.eye(3))

    def test_angle_addition(self):
        half = Transform(geom.rot_x(np.radians(0.5)))
        seq = accumulate(relative_seq([Transform.identity(), half, half]))
        np.testing.assert_allclose(
            seq.frames[2].rotation, geom.rot_x(np.radians(1.0)), atol=1e-12
        )

    def test_round_trip_with_differentiate(self):
        frames = random_transforms(250, seed=40)
        seq = relative_seq(frames)
        back = differentiate(accumulate(seq))
        assert back.kind is SequenceKind.RELATIVE
        for a, b in zip(back.frames, frames):
            assert np.abs(a.rotation - b.rotation).max() < 1e-9
            assert np.abs(a.translation - b.translation).max() < 1e-9

    def test_kind_errors(self):
        seq = absolute_seq([Transform.identity()])
        with pytest.raises(AlreadyAbsoluteError):
            accumulate(seq)
        with pytest.raises(AlreadyRelativeError):
            differentiate(relative_seq([Transform.identity()]))

    def test_empty_sequence_rejected(self):
        with pytest.raises(EmptySequenceError):
            relative_seq([])

    def test_preserves_length_and_frame0(self):
        frames = random_transforms(30, seed=41)
        seq = accumulate(relative_seq(frames))
        assert len(seq) == 30
        np.testing.assert_array_equal(seq.frames[0].rotation, frames[0].rotation)


class TestIekfEstimator:
    def test_static_vehicle_identity_extrinsic(self):
        pose = Transform(geom.rot_x(0.02) @ geom.rot_y(0.4), np.array([3.0, 0.1, -2.0]))
        estimates = estimate_normals(absolute_seq([pose] * 60))
        assert len(estimates) == 60
        for est in estimates:
            if not est.burn_in:
                assert np.abs(est.normal - UP).max() < 1e-9
                assert abs(est.pitch) < 1e-9

    def test_static_vehicle_with_extrinsic(self):
        ext_rot = geom.rot_x(np.radians(4.0)) @ geom.rot_z(np.radians(-1.0))
        extrinsic = ExtrinsicCalibration(Transform(ext_rot, np.array([0.0, 1.5, 0.0])))
        pose = Transform(geom.rot_y(1.0))
        estimates = estimate_normals(absolute_seq([pose] * 40), extrinsic)
        for est in estimates:
            if not est.burn_in:
                assert np.abs(est.normal - extrinsic.normal).max() < 1e-9

    def test_raw_residual_skips_extrinsic(self):
        ext = ExtrinsicCalibration(Transform(geom.rot_x(np.radians(4.0))))
        pose = Transform(geom.rot_y(0.3))
        raw = estimate_normals(absolute_seq([pose] * 30), ext, raw_residual=True)
        for est in raw:
            if not est.burn_in:
                assert np.abs(est.normal - UP).max() < 1e-9

    def test_recovers_synthetic_oscillation(self):
        cfg = SimConfig(
            frames=1000, pitch_amplitude=1.0, pitch_period=2.0,
            odometry_noise_std=0.02, seed=7,
        )
        out = simulate(cfg)
        estimates = estimate_normals(out.odometry)
        assert mean_error_deg(estimates, out.gt_normals) < 0.5

    def test_burn_in_flags(self):
        seq = absolute_seq([Transform.identity()] * 30)
        estimates = estimate_normals(seq, burn_in=5)
        assert [e.burn_in for e in estimates[:5]] == [True] * 5
        assert not any(e.burn_in for e in estimates[5:])

    def test_deterministic_bit_identical(self):
        cfg = SimConfig(frames=200, odometry_noise_std=0.05, seed=3)
        out = simulate(cfg)
        a = estimate_normals(out.odometry)
        b = estimate_normals(out.odometry)
        for x, y in zip(a, b):
            assert np.array_equal(x.normal, y.normal)
            assert x.pitch == y.pitch

    def test_identity_init_has_transient_when_first_pose_is_far(self):
        pose = Transform(geom.rot_y(1.2) @ geom.rot_x(0.3))
        seq = absolute_seq([pose] * 10)
        seeded = estimate_normals(seq, burn_in=0)
        literal = estimate_normals(seq, burn_in=0, identity_init=True)
        assert np.abs(seeded[0].normal - UP).max() < 1e-9
        assert angle_between_deg(literal[0].normal, UP) > 1.0


class TestConstantBaseline:
    def test_emits_extrinsic_normal(self):
        ext = ExtrinsicCalibration(Transform(geom.rot_x(np.radians(3.0))))
        estimates = baseline_constant(absolute_seq(random_transforms(25, seed=42)), ext)
        assert len(estimates) == 25
        for est in estimates:
            np.testing.assert_allclose(est.normal, ext.normal, atol=1e-15)

    def test_identity_extrinsic_gives_up_vector(self):
        estimates = baseline_constant(absolute_seq([Transform.identity()] * 5))
        for est in estimates:
            np.testing.assert_array_equal(est.normal, UP)

    def test_sinusoid_error_matches_rectified_mean(self):
        amplitude = 1.0
        cfg = SimConfig(frames=1000, pitch_amplitude=amplitude, pitch_period=2.0, seed=0)
        out = simulate(cfg)
        got = mean_error_deg(baseline_constant(out.odometry), out.gt_normals)
        # Rectified-sine mean sampled at 20 points per period.
        expected = amplitude * np.abs(np.sin(np.pi * np.arange(10) / 10)).mean()
        assert got == pytest.approx(expected, rel=0.01)
        assert abs(got - 2.0 * amplitude / np.pi) / (2.0 * amplitude / np.pi) < 0.05


class TestRelativeBaseline:
    def test_identity_motion_gives_static_normal(self):
        seq = relative_seq([Transform.identity()] * 20)
        for est in baseline_relative(seq):
            np.testing.assert_allclose(est.normal, UP, atol=1e-15)

    def test_persistent_offset_step_never_reconverges(self):
        """Two-segment oracle: after a permanent attitude offset the true
        normal deviates for good, but the inter-frame residual sees only
        the step frame, so its error persists at the offset size."""
        offset = np.radians(2.0)
        flat = [Transform.identity()] * 50
        tilted = [Transform(geom.rot_x(offset))] * 50
        seq = absolute_seq(flat + tilted)
        gt = np.vstack([
            np.tile(UP, (50, 1)),
            np.tile(geom.rot_x(offset).T @ UP, (50, 1)),
        ])
        estimates = baseline_relative(seq)
        errors = [
            angle_between_deg(e.normal, gt[i]) for i, e in enumerate(estimates)
        ]
        assert max(errors[:50]) < 1e-9
        # Every frame after the step keeps the full 2 degree error.
        for err in errors[51:]:
            assert err == pytest.approx(2.0, abs=1e-6)
        # The filter at least tracks the deviation while it converges;
        # the relative baseline misses it from the very next frame.
        iekf_errors = [
            angle_between_deg(e.normal, gt[i])
            for i, e in enumerate(estimate_normals(seq))
        ]
        assert iekf_errors[51] < 0.5 < errors[51]
        assert np.mean(iekf_errors[51:60]) < np.mean(errors[51:60])

    def test_accepts_relative_and_absolute_input(self):
        frames = random_transforms(15, seed=43)
        rel = relative_seq(frames)
        out_rel = baseline_relative(rel)
        out_abs = baseline_relative(accumulate(rel))
        for a, b in zip(out_rel, out_abs):
            assert np.abs(a.normal - b.normal).max() < 1e-9


class TestAbsoluteBaseline:
    def test_zero_motion_equals_constant_baseline(self):
        cfg = SimConfig(frames=100, pitch_amplitude=0.0, roll_amplitude=0.0,
                        odometry_noise_std=0.0, seed=1)
        out = simulate(cfg)
        absolute = baseline_absolute(out.odometry)
        constant = baseline_constant(out.odometry)
        for a, c in zip(absolute, constant):
            assert np.abs(a.normal - c.normal).max() < 1e-12

    def test_drift_grows_past_the_filter_error(self):
        cfg = SimConfig(frames=2000, pitch_amplitude=1.0, pitch_period=2.0,
                        odometry_noise_std=0.02, drift_rate=0.01, seed=7)
        out = simulate(cfg)
        gt = out.gt_normals

        abs_errors = np.array([
            angle_between_deg(e.normal, gt[i])
            for i, e in enumerate(baseline_absolute(out.odometry))
        ])
        iekf_mean = mean_error_deg(estimate_normals(out.odometry), gt)
        assert abs_errors[20:].mean() > 5.0 * iekf_mean
        # Error keeps growing as drift accumulates.
        assert abs_errors[1500:].mean() > 2.0 * abs_errors[20:520].mean()


class TestSharedProperties:
    @pytest.mark.parametrize(
        "runner",
        [estimate_normals, baseline_constant, baseline_relative, baseline_absolute],
        ids=["iekf", "constant", "relative", "absolute"],
    )
    def test_output_length_matches_input(self, runner):
        cfg = SimConfig(frames=64, seed=2)
        out = simulate(cfg)
        assert len(runner(out.odometry)) == 64

    @pytest.mark.parametrize(
        "runner",
        [estimate_normals, baseline_constant, baseline_relative, baseline_absolute],
        ids=["iekf", "constant", "relative", "absolute"],
    )
    def test_global_heading_rotation_leaves_normals_unchanged(self, runner):
        cfg = SimConfig(frames=120, pitch_amplitude=1.0, roll_amplitude=0.4,
                        odometry_noise_std=0.05, seed=5)
        out = simulate(cfg)
        absolute = accumulate(out.odometry)
        heading = geom.rot_y(np.radians(73.0))
        turned = absolute_seq(
            [Transform(heading @ t.rotation, heading @ t.translation)
             for t in absolute.frames]
        )
        for a, b in zip(runner(absolute), runner(turned)):
            assert np.abs(a.normal - b.normal).max() < 1e-9

    def test_ordering_on_the_drift_benchmark(self):
        cfg = SimConfig(
            frames=2000, pitch_amplitude=1.0, pitch_period=2.0,
            odometry_noise_std=0.02, drift_rate=0.01,
            slope_profile=((0.0, 0.0), (50.0, 0.0), (120.0, 2.0), (1e6, 2.0)),
            seed=7,
        )
        out = simulate(cfg)
        gt = out.gt_normals
        errors = {
            "iekf": mean_error_deg(estimate_normals(out.odometry), gt),
            "constant": mean_error_deg(baseline_constant(out.odometry), gt),
            "relative": mean_error_deg(baseline_relative(out.odometry), gt),
            "absolute": mean_error_deg(baseline_absolute(out.odometry), gt),
        }
        assert errors["iekf"] < errors["constant"] < errors["relative"] < errors["absolute"]
