"""Dataset ingestion and result serialization.

All text formats are UTF-8, newline-delimited; lines starting with '#' are
comments. Writers use fixed decimal formatting so identical inputs produce
identical bytes. Malformed rows raise ParseError with the line number
instead of being silently skipped.
"""

from __future__ import annotations

import json
import math
import warnings
from enum import Enum
from pathlib import Path

import numpy as np

from groundline import geom
from groundline.errors import (
    AlreadyAbsoluteError,
    FrameDropWarning,
    InvalidFactorError,
    NonFiniteValueError,
    ParseError,
    RotationRepairWarning,
)
from groundline.estimator import NormalEstimate, OdometrySequence, SequenceKind
from groundline.geom import Transform

_REPAIR_WARN_THRESHOLD = 1e-3


class PoseFormat(Enum):
    """On-disk pose layouts."""

    KITTI_ABSOLUTE = "kitti"  # 12 floats per line, row-major 3x4 [R|t]
    RELATIVE_CSV = "relcsv"  # frame index + the same 12 floats, comma separated


def _data_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        for number, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield number, line


def _repair_rotation(mat: np.ndarray, path, line_number) -> np.ndarray:
    fixed = geom.project_to_rotation(mat)
    correction = float(np.abs(fixed - mat).max())
    if correction > _REPAIR_WARN_THRESHOLD:
        warnings.warn(
            f"{path}:{line_number}: rotation repaired by {correction:.2e}",
            RotationRepairWarning,
            stacklevel=3,
        )
    return fixed


def _parse_transform_tokens(tokens, path, line_number) -> Transform:
    try:
        values = [float(tok) for tok in tokens]
    except ValueError as exc:
        raise ParseError(path, line_number, f"non-numeric field: {exc}") from None
    if not all(math.isfinite(v) for v in values):
        raise NonFiniteValueError(path, line_number, "non-finite pose entry")
    mat = np.array(values).reshape(3, 4)
    rot = _repair_rotation(mat[:, :3], path, line_number)
    return Transform(rot, mat[:, 3])


def parse_poses(path, fmt: PoseFormat, frame_rate: float = 10.0) -> OdometrySequence:
    """Read a pose file; loaded rotations are re-orthonormalized."""
    frames = []
    for number, line in _data_lines(path):
        if fmt is PoseFormat.KITTI_ABSOLUTE:
            tokens = line.split()
            if len(tokens) != 12:
                raise ParseError(path, number, f"expected 12 fields, got {len(tokens)}")
            frames.append(_parse_transform_tokens(tokens, path, number))
        else:
            tokens = [tok.strip() for tok in line.split(",")]
            if len(tokens) != 13:
                raise ParseError(path, number, f"expected 13 fields, got {len(tokens)}")
            frames.append(_parse_transform_tokens(tokens[1:], path, number))
    kind = (
        SequenceKind.ABSOLUTE
        if fmt is PoseFormat.KITTI_ABSOLUTE
        else SequenceKind.RELATIVE
    )
    if not frames:
        raise ParseError(path, 0, "no pose lines found")
    return OdometrySequence(kind, tuple(frames), frame_rate)


def write_poses(seq: OdometrySequence, path, fmt: PoseFormat) -> None:
    lines = []
    if fmt is PoseFormat.RELATIVE_CSV:
        lines.append("# frame,r00,r01,r02,tx,r10,r11,r12,ty,r20,r21,r22,tz")
    for i, t in enumerate(seq.frames):
        mat = np.hstack([t.rotation, t.translation.reshape(3, 1)])
        fields = [f"{v:.12f}" for v in mat.reshape(12)]
        if fmt is PoseFormat.KITTI_ABSOLUTE:
            lines.append(" ".join(fields))
        else:
            lines.append(f"{i}," + ",".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def downsample_imu(seq: OdometrySequence, factor: int) -> OdometrySequence:
    """Compose groups of `factor` consecutive frames into one.

    The leading group absorbs the absolute initial pose and becomes the
    downsampled stream's initial pose. Trailing frames that do not fill a
    group are dropped with a warning so frame timing stays uniform.
    """
    if seq.kind is not SequenceKind.RELATIVE:
        raise AlreadyAbsoluteError("downsampling applies to relative sequences")
    if not isinstance(factor, int) or factor < 1:
        raise InvalidFactorError(f"factor must be a positive integer, got {factor}")
    if factor == 1:
        return seq
    groups = len(seq.frames) // factor
    remainder = len(seq.frames) - groups * factor
    if remainder:
        warnings.warn(
            f"dropping {remainder} trailing frame(s) not filling a group of {factor}",
            FrameDropWarning,
            stacklevel=2,
        )
    out = []
    for g in range(groups):
        combined = seq.frames[g * factor]
        for rel in seq.frames[g * factor + 1 : (g + 1) * factor]:
            combined = geom.compose(combined, rel)
        out.append(combined)
    return OdometrySequence(SequenceKind.RELATIVE, tuple(out), seq.frame_rate / factor)


NORMALS_HEADER = "# frame,nx,ny,nz,pitch_deg"


def write_normals(estimates, path) -> None:
    """NormalCsv layout: frame index, unit normal, pitch in degrees."""
    lines = [NORMALS_HEADER]
    for est in estimates:
        n = est.normal
        pitch_deg = math.degrees(est.pitch)
        lines.append(
            f"{est.frame_index},{n[0]:.9f},{n[1]:.9f},{n[2]:.9f},{pitch_deg:.6f}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_normals(path):
    """Returns (frame indices, normals (N,3), pitches in radians)."""
    indices, normals, pitches = [], [], []
    for number, line in _data_lines(path):
        tokens = [tok.strip() for tok in line.split(",")]
        if len(tokens) != 5:
            raise ParseError(path, number, f"expected 5 fields, got {len(tokens)}")
        try:
            idx = int(tokens[0])
            values = [float(tok) for tok in tokens[1:]]
        except ValueError as exc:
            raise ParseError(path, number, f"non-numeric field: {exc}") from None
        if not all(math.isfinite(v) for v in values):
            raise NonFiniteValueError(path, number, "non-finite normal entry")
        indices.append(idx)
        normals.append(values[:3])
        pitches.append(math.radians(values[3]))
    return np.array(indices, dtype=int), np.array(normals).reshape(-1, 3), np.array(pitches)


def normal_estimates_from_file(path, burn_in: int = 0):
    """Rehydrate NormalEstimate records from a NormalCsv file."""
    indices, normals, pitches = read_normals(path)
    return [
        NormalEstimate(
            frame_index=int(i),
            normal=normals[k] / np.linalg.norm(normals[k]),
            residual=np.eye(3),
            pitch=float(pitches[k]),
            burn_in=int(i) < burn_in,
        )
        for k, i in enumerate(indices)
    ]


def write_report(payload, path) -> None:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    if hasattr(payload, "to_dict"):
        payload = payload.to_dict()
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def write_error_csv(report, path) -> None:
    """One row per counted frame: index within the counted range, radians, degrees."""
    lines = ["# frame,error_rad,error_deg"]
    for i, err in enumerate(report.per_frame_errors):
        lines.append(f"{i},{err:.9f},{math.degrees(err):.9f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_xyz(path) -> np.ndarray:
    """Plain-text point cloud: one 'x y z' triple per line."""
    points = []
    for number, line in _data_lines(path):
        tokens = line.split()
        if len(tokens) != 3:
            raise ParseError(path, number, f"expected 3 fields, got {len(tokens)}")
        try:
            xyz = [float(tok) for tok in tokens]
        except ValueError as exc:
            raise ParseError(path, number, f"non-numeric field: {exc}") from None
        if not all(math.isfinite(v) for v in xyz):
            raise NonFiniteValueError(path, number, "non-finite point")
        points.append(xyz)
    return np.array(points).reshape(-1, 3)


def read_velodyne_bin(path) -> np.ndarray:
    """KITTI Velodyne layout: little-endian float32 (x, y, z, intensity)."""
    raw = np.fromfile(path, dtype="<f4")
    if raw.size % 4 != 0:
        raise ParseError(path, 0, f"byte count not a multiple of 16 ({raw.size} floats)")
    return raw.reshape(-1, 4)[:, :3].astype(np.float64)


def _read_pnm_header(fh, path, magic_expected):
    def _token():
        tok = b""
        while True:
            ch = fh.read(1)
            if not ch:
                raise ParseError(path, 0, "truncated header")
            if ch == b"#":
                while ch and ch != b"\n":
                    ch = fh.read(1)
                continue
            if ch.isspace():
                if tok:
                    return tok
                continue
            tok += ch

    magic = _token()
    if magic != magic_expected:
        raise ParseError(path, 0, f"expected {magic_expected.decode()}, got {magic!r}")
    width = int(_token())
    height = int(_token())
    maxval = int(_token())
    if maxval <= 0 or maxval > 255:
        raise ParseError(path, 0, f"only 8-bit rasters supported, maxval={maxval}")
    return width, height


def read_pgm(path) -> np.ndarray:
    """Binary PGM (P5), 8-bit; returns uint8 array of shape (height, width)."""
    with open(path, "rb") as fh:
        width, height = _read_pnm_header(fh, path, b"P5")
        data = fh.read(width * height)
    if len(data) != width * height:
        raise ParseError(path, 0, "truncated pixel data")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(image: np.ndarray, path) -> None:
    image = np.asarray(image)
    if image.dtype != np.uint8:
        image = np.clip(np.round(image), 0, 255).astype(np.uint8)
    height, width = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode())
        fh.write(image.tobytes())


def read_ppm(path) -> np.ndarray:
    """Binary PPM (P6), 8-bit; returns uint8 array of shape (height, width, 3)."""
    with open(path, "rb") as fh:
        width, height = _read_pnm_header(fh, path, b"P6")
        data = fh.read(width * height * 3)
    if len(data) != width * height * 3:
        raise ParseError(path, 0, "truncated pixel data")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3).copy()


def write_ppm(image: np.ndarray, path) -> None:
    image = np.asarray(image)
    if image.dtype != np.uint8:
        image = np.clip(np.round(image), 0, 255).astype(np.uint8)
    height, width, _ = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode())
        fh.write(image.tobytes())


def read_ground_mask(path) -> np.ndarray:
    """PGM mask; nonzero pixels flag ground."""
    return read_pgm(path) != 0


def read_extrinsic(path) -> Transform:
    """Single-line 3x4 [R|t] row-major text file."""
    for number, line in _data_lines(path):
        tokens = line.split()
        if len(tokens) != 12:
            raise ParseError(path, number, f"expected 12 fields, got {len(tokens)}")
        return _parse_transform_tokens(tokens, path, number)
    raise ParseError(path, 0, "no data line found")


def read_intrinsics(path):
    """JSON camera intrinsics: fx, fy, cx, cy, width, height."""
    from groundline.projective import CameraIntrinsics

    data = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return CameraIntrinsics(
            fx=float(data["fx"]),
            fy=float(data["fy"]),
            cx=float(data["cx"]),
            cy=float(data["cy"]),
            width=int(data["width"]),
            height=int(data["height"]),
        )
    except KeyError as exc:
        raise ParseError(path, 0, f"missing intrinsics key {exc}") from None


def read_kitti_calib(path) -> dict:
    """KITTI calib.txt: 'NAME: v0 v1 ...' per line, values as 3x4 arrays."""
    out = {}
    for number, line in _data_lines(path):
        if ":" not in line:
            raise ParseError(path, number, "expected 'NAME: values' layout")
        name, _, rest = line.partition(":")
        try:
            values = np.array([float(tok) for tok in rest.split()])
        except ValueError as exc:
            raise ParseError(path, number, f"non-numeric field: {exc}") from None
        if values.size != 12:
            raise ParseError(path, number, f"expected 12 values, got {values.size}")
        out[name.strip()] = values.reshape(3, 4)
    return out


def kitti_cam_from_velo(calib: dict, camera: str = "P2") -> Transform:
    """Velodyne-to-camera transform for the given projection (default cam 2).

    Combines Tr (velo to cam0) with the camera's baseline offset K^-1 P[:,3].
    """
    tr = calib["Tr"]
    proj = calib[camera]
    k = proj[:, :3]
    offset = np.linalg.solve(k, proj[:, 3])
    rot = geom.project_to_rotation(tr[:, :3])
    return Transform(rot, tr[:, 3] + offset)


def kitti_intrinsics(calib: dict, width: int, height: int, camera: str = "P2"):
    from groundline.projective import CameraIntrinsics

    proj = calib[camera]
    return CameraIntrinsics(
        fx=float(proj[0, 0]),
        fy=float(proj[1, 1]),
        cx=float(proj[0, 2]),
        cy=float(proj[1, 2]),
        width=width,
        height=height,
    )
