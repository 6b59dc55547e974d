"""Command-line interface wiring the pipeline end to end.

Exit codes: 0 success, 1 data error, 2 usage or config error. The log
level comes from GROUNDLINE_LOG (error|warn|info|debug).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from groundline import _kernels, io, metrics, projective
from groundline.errors import GroundlineError, InvalidConfigError
from groundline.estimator import (
    DEFAULT_BURN_IN,
    ESTIMATORS,
    ExtrinsicCalibration,
    estimate_normals,
)
from groundline.filter import FilterParams
from groundline.sim import SimConfig, simulate

log = logging.getLogger("groundline")

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _configure_logging() -> None:
    name = os.environ.get("GROUNDLINE_LOG", "warn").lower()
    logging.basicConfig(
        level=_LOG_LEVELS.get(name, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _add_estimate_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, nargs="+", help="pose file(s)")
    p.add_argument(
        "--format",
        choices=[f.value for f in io.PoseFormat],
        default="kitti",
        help="input pose layout",
    )
    p.add_argument(
        "--estimator", choices=sorted(ESTIMATORS), default="iekf", help="method to run"
    )
    p.add_argument("--process-var", type=float, default=1e-2)
    p.add_argument("--meas-var", type=float, default=1.0)
    p.add_argument("--extrinsic", help="3x4 [R|t] text file; identity when omitted")
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--raw-residual", action="store_true", help="skip extrinsic composition")
    p.add_argument("--identity-init", action="store_true", help="paper-literal filter init")
    p.add_argument("--rate", type=float, default=10.0, help="frame rate, Hz")
    p.add_argument("--out", required=True, help="output file (directory for multiple inputs)")
    p.add_argument("--jobs", type=int, default=1, help="parallel sequences")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groundline",
        description="Ground plane normal estimation from vehicle ego-motion",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic trajectory")
    p.add_argument("--config", help="SimConfig JSON; defaults when omitted")
    p.add_argument("--seed", type=int, help="override the config's seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate normals from odometry")
    _add_estimate_args(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("evaluate", help="angular error between normal files")
    p.add_argument("--est", required=True, help="estimated normals CSV")
    p.add_argument("--gt", required=True, help="ground-truth normals CSV")
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--out", help="write the report as JSON here")
    p.add_argument("--csv", help="write per-frame errors as CSV here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="pitch/roll dynamics of a normal stream")
    p.add_argument("--input", required=True, help="normals CSV")
    p.add_argument("--static-normal", default="0,1,0", help="reference normal x,y,z")
    p.add_argument("--extrinsic", help="derive the reference from this calibration")
    p.add_argument("--out", help="write the stats as JSON here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("ipm", help="per-frame IPM homographies and optional BEV warps")
    p.add_argument("--intrinsics", help="camera intrinsics JSON")
    p.add_argument("--normals", help="normals CSV (sensor frame)")
    p.add_argument("--static", action="store_true", help="single static-normal homography")
    p.add_argument("--height", type=float, default=1.5, help="camera height, meters")
    p.add_argument("--extent", type=float, default=20.0, help="BEV side length, meters")
    p.add_argument("--resolution", type=float, default=0.05, help="meters per BEV pixel")
    p.add_argument("--image", help="PGM/PPM image to warp with each homography")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ipm)

    p = sub.add_parser("vanishing", help="vanishing lines from normals")
    p.add_argument("--intrinsics", help="camera intrinsics JSON")
    p.add_argument("--normals", required=True, help="normals CSV (sensor frame)")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_vanishing)

    return parser


def cmd_simulate(args) -> int:
    if args.config:
        config = SimConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
    else:
        config = SimConfig()
    if args.seed is not None:
        config = SimConfig(**{**config.__dict__, "seed": args.seed})
    config.validate()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = simulate(config)

    io.write_poses(result.odometry, out_dir / "odometry.csv", io.PoseFormat.RELATIVE_CSV)
    from groundline.estimator import OdometrySequence, SequenceKind

    gt_seq = OdometrySequence(SequenceKind.ABSOLUTE, result.gt_poses, config.frame_rate)
    io.write_poses(gt_seq, out_dir / "gt_poses.txt", io.PoseFormat.KITTI_ABSOLUTE)
    _write_gt_normals(result.gt_normals, out_dir / "gt_normals.csv")
    log.info("simulated %d frames into %s", config.frames, out_dir)
    return 0


def _write_gt_normals(normals: np.ndarray, path) -> None:
    lines = [io.NORMALS_HEADER]
    for i, n in enumerate(normals):
        pitch_deg = math.degrees(math.atan2(n[2], n[1]))
        lines.append(f"{i},{n[0]:.9f},{n[1]:.9f},{n[2]:.9f},{pitch_deg:.6f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _run_one_estimate(args, input_path, out_path) -> tuple[str, float, float]:
    seq = io.parse_poses(input_path, io.PoseFormat(args.format), frame_rate=args.rate)
    extrinsic = (
        ExtrinsicCalibration(io.read_extrinsic(args.extrinsic))
        if args.extrinsic
        else ExtrinsicCalibration()
    )
    times_ns: list[int] = []
    if args.estimator == "iekf":
        params = FilterParams(process_var=args.process_var, meas_var=args.meas_var)
        estimates = estimate_normals(
            seq,
            extrinsic,
            params,
            burn_in=args.burn_in,
            identity_init=args.identity_init,
            raw_residual=args.raw_residual,
            frame_times_ns=times_ns,
        )
    else:
        import time

        t0 = time.perf_counter_ns()
        estimates = ESTIMATORS[args.estimator](seq, extrinsic, burn_in=args.burn_in)
        times_ns = [(time.perf_counter_ns() - t0) // max(len(estimates), 1)]
    io.write_normals(estimates, out_path)
    times = np.asarray(times_ns, dtype=np.float64) / 1e6
    return str(out_path), float(times.mean()), float(np.percentile(times, 99))


def cmd_estimate(args) -> int:
    inputs = [Path(p) for p in args.input]
    if len(inputs) == 1:
        pairs = [(inputs[0], Path(args.out))]
    else:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        pairs = [(p, out_dir / f"{p.stem}_normals.csv") for p in inputs]

    if args.jobs > 1 and len(pairs) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(
                pool.map(lambda pair: _run_one_estimate(args, *pair), pairs)
            )
    else:
        results = [_run_one_estimate(args, src, dst) for src, dst in pairs]

    for out_path, mean_ms, p99_ms in results:
        print(
            f"{out_path}: {args.estimator} latency mean {mean_ms:.4f} ms/frame, "
            f"p99 {p99_ms:.4f} ms/frame ({_kernels.BACKEND} kernels)"
        )
    return 0


def cmd_evaluate(args) -> int:
    est_idx, est_normals, _ = io.read_normals(args.est)
    gt_idx, gt_normals, _ = io.read_normals(args.gt)
    report = metrics.angular_error(est_normals, gt_normals, burn_in=args.burn_in)
    if args.out:
        io.write_report(report, args.out)
    if args.csv:
        io.write_error_csv(report, args.csv)
    print(
        f"mean angular error: {report.mean_error_deg:.6f} deg "
        f"over {report.frames_counted} frames"
    )
    return 0


def cmd_stats(args) -> int:
    _, normals, _ = io.read_normals(args.input)
    if args.extrinsic:
        from groundline import geom

        static = geom.normal_column(io.read_extrinsic(args.extrinsic).rotation)
    else:
        static = np.array([float(tok) for tok in args.static_normal.split(",")])
    stats = metrics.dynamics_stats(normals, static)
    if args.out:
        io.write_report(stats, args.out)
    print(
        f"pitch mean {stats.pitch_mean:.4f} deg (std {stats.pitch_std:.4f}), "
        f"roll mean {stats.roll_mean:.4f} deg (std {stats.roll_std:.4f}) "
        f"over {stats.frames} frames"
    )
    return 0


def _require_intrinsics(args):
    if not args.intrinsics:
        print("error: --intrinsics is required", file=sys.stderr)
        return None
    return io.read_intrinsics(args.intrinsics)


def cmd_ipm(args) -> int:
    intrinsics = _require_intrinsics(args)
    if intrinsics is None:
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.static or not args.normals:
        frames = np.array([0])
        normals = np.array([[0.0, 1.0, 0.0]])
    else:
        frames, normals, _ = io.read_normals(args.normals)

    image = None
    if args.image:
        path = Path(args.image)
        image = io.read_ppm(path) if path.suffix.lower() == ".ppm" else io.read_pgm(path)

    lines = ["# frame,h00,h01,h02,h10,h11,h12,h20,h21,h22"]
    for frame, normal in zip(frames, normals):
        cam_normal = projective.camera_normal_from_sensor(normal)
        plane = projective.GroundPlane(cam_normal, args.height)
        h = projective.ipm_homography(intrinsics, plane)
        lines.append(str(frame) + "," + ",".join(f"{v:.12e}" for v in h.reshape(9)))
        if image is not None:
            bev = projective.warp_to_bev(image, h, args.extent, args.resolution)
            if bev.ndim == 3:
                io.write_ppm(bev, out_dir / f"bev_{frame:06d}.ppm")
            else:
                io.write_pgm(bev, out_dir / f"bev_{frame:06d}.pgm")
    (out_dir / "homographies.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(frames)} homographies to {out_dir / 'homographies.csv'}")
    return 0


def cmd_vanishing(args) -> int:
    intrinsics = _require_intrinsics(args)
    if intrinsics is None:
        return 1
    frames, normals, _ = io.read_normals(args.normals)
    lines = ["# frame,a,b,c,v_left,v_right"]
    for frame, normal in zip(frames, normals):
        cam_normal = projective.camera_normal_from_sensor(normal)
        a, b, c = projective.vanishing_line(intrinsics, cam_normal)
        v_left = -(a * 0.0 + c) / b
        v_right = -(a * (intrinsics.width - 1) + c) / b
        lines.append(
            f"{frame},{a:.9f},{b:.9f},{c:.9f},{v_left:.6f},{v_right:.6f}"
        )
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(frames)} vanishing lines to {args.out}")
    return 0


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GroundlineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
