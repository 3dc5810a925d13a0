#!/usr/bin/env python3
# 🌀 Eidosian Artifact Formats
"""
Readers and writers for every artifact a sequence directory contains.

Binary formats are little-endian with a four-byte magic:

- ``TTNR`` raster: version u8, dtype code u8 (1=u8, 2=u16, 3=f32),
  channels u8, width u32, height u32, then row-major interleaved data.
- ``TOCC`` occupancy grid: version u8, resolution f32, origin 3×f32,
  dims 3×u32, then one state byte per voxel (x-major).
- ``TLDR`` LiDAR scan: count u32, then count × (x, y, z) f32.

Text formats (poses, scenes, verification reports, SLAM outcomes) use LF
line endings and ``repr`` floats so they round-trip exactly.
"""

import logging
import math
import struct
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from .errors import FormatError, PoseFileError
from .evalbench import SequenceOutcome
from .geom import Pose, RasterImage
from .mapper import OCCUPIED, OccupancyGrid
from .scenesim import Scene, format_scene, parse_scene
from .verify import PairCheck, VerifyReport, VerifyThresholds

logger = logging.getLogger("traj_forge.file_formats")

PathLike = Union[str, Path]

FORMAT_VERSION = 1

RASTER_MAGIC = b"TTNR"
GRID_MAGIC = b"TOCC"
LIDAR_MAGIC = b"TLDR"

_RASTER_HEADER = struct.Struct("<4sBBBII")
_GRID_HEADER = struct.Struct("<4sBf3f3I")
_LIDAR_HEADER = struct.Struct("<4sI")

DTYPE_CODES = {np.dtype(np.uint8): 1, np.dtype(np.uint16): 2, np.dtype(np.float32): 3}
CODE_DTYPES = {code: dtype.newbyteorder("<") for dtype, code in DTYPE_CODES.items()}

REPORT_HEADER = "# traj_forge verify report"


def _write_bytes(path: PathLike, payload: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    return path


def _write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return path


def _read_text(path: PathLike) -> str:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return f.read()


def _unpack_header(header: struct.Struct, payload: bytes, magic: bytes):
    if len(payload) < 4 or payload[:4] != magic:
        raise FormatError(f"Bad magic {payload[:4]!r}, expected {magic!r}", 0)
    if len(payload) < header.size:
        raise FormatError(f"Truncated header: {len(payload)} of {header.size} bytes", len(payload))
    return header.unpack_from(payload, 0)


def _check_version(version: int) -> None:
    if version != FORMAT_VERSION:
        # The version byte follows the magic
        raise FormatError(f"Unsupported format version {version}", 4)


def _body(payload: bytes, start: int, expected: int) -> bytes:
    if len(payload) < start + expected:
        raise FormatError(
            f"Truncated data: expected {expected} bytes, found {len(payload) - start}", len(payload)
        )
    if len(payload) > start + expected:
        raise FormatError(f"{len(payload) - start - expected} trailing bytes", start + expected)
    return payload[start : start + expected]


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🖼️ TTNR rasters
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def encode_raster(image: RasterImage) -> bytes:
    data = image.data
    header = _RASTER_HEADER.pack(
        RASTER_MAGIC, FORMAT_VERSION, DTYPE_CODES[data.dtype], image.channels, image.width, image.height
    )
    return header + data.astype(data.dtype.newbyteorder("<"), copy=False).tobytes(order="C")


def decode_raster(payload: bytes) -> RasterImage:
    """
    Parse a ``TTNR`` buffer.

    Raises:
        FormatError: On bad magic, unknown version or dtype code, or truncation
    """
    _, version, code, channels, width, height = _unpack_header(_RASTER_HEADER, payload, RASTER_MAGIC)
    _check_version(version)
    if code not in CODE_DTYPES:
        raise FormatError(f"Unknown dtype code {code}", 5)
    if channels == 0:
        raise FormatError("Raster has zero channels", 6)
    dtype = CODE_DTYPES[code]
    size = width * height * channels * dtype.itemsize
    body = _body(payload, _RASTER_HEADER.size, size)
    data = np.frombuffer(body, dtype=dtype).reshape(height, width, channels)
    return RasterImage(data.astype(dtype.newbyteorder("="), copy=True))


def write_raster(path: PathLike, image: RasterImage) -> Path:
    return _write_bytes(path, encode_raster(image))


def read_raster(path: PathLike, dtype: Optional[str] = None) -> RasterImage:
    """Read a raster, optionally insisting on its dtype tag (``u8``, ``u16``, ``f32``)."""
    image = decode_raster(Path(path).read_bytes())
    if dtype is not None and image.dtype != dtype:
        raise FormatError(f"{path}: expected {dtype} raster, found {image.dtype}", 5)
    return image


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🗺️ TOCC occupancy grids
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def encode_grid(grid: OccupancyGrid) -> bytes:
    header = _GRID_HEADER.pack(GRID_MAGIC, FORMAT_VERSION, grid.resolution, *grid.origin, *grid.dims)
    return header + np.ascontiguousarray(grid.cells, dtype=np.uint8).tobytes(order="C")


def decode_grid(payload: bytes) -> OccupancyGrid:
    """
    Parse a ``TOCC`` buffer.

    The resolution and origin are stored as f32, so they come back at
    single precision.
    """
    fields = _unpack_header(_GRID_HEADER, payload, GRID_MAGIC)
    _check_version(fields[1])
    resolution = fields[2]
    origin = fields[3:6]
    dims = fields[6:9]
    if not resolution > 0 or min(dims) == 0:
        raise FormatError(f"Invalid grid geometry: resolution {resolution}, dims {dims}", 5)
    count = int(np.prod(dims))
    body = _body(payload, _GRID_HEADER.size, count)
    cells = np.frombuffer(body, dtype=np.uint8).reshape(dims)
    if cells.max() > OCCUPIED:
        bad = int(np.argmax(cells.ravel() > OCCUPIED))
        raise FormatError(f"Invalid voxel state {int(cells.ravel()[bad])}", _GRID_HEADER.size + bad)
    return OccupancyGrid(origin, resolution, dims, cells)


def write_grid(path: PathLike, grid: OccupancyGrid) -> Path:
    return _write_bytes(path, encode_grid(grid))


def read_grid(path: PathLike) -> OccupancyGrid:
    return decode_grid(Path(path).read_bytes())


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📡 TLDR point clouds
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def encode_lidar(points: np.ndarray) -> bytes:
    points = np.asarray(points, dtype="<f4").reshape(-1, 3)
    return _LIDAR_HEADER.pack(LIDAR_MAGIC, len(points)) + points.tobytes(order="C")


def decode_lidar(payload: bytes) -> np.ndarray:
    _, count = _unpack_header(_LIDAR_HEADER, payload, LIDAR_MAGIC)
    body = _body(payload, _LIDAR_HEADER.size, count * 12)
    return np.frombuffer(body, dtype="<f4").reshape(count, 3).astype(np.float32)


def write_lidar(path: PathLike, points: np.ndarray) -> Path:
    return _write_bytes(path, encode_lidar(points))


def read_lidar(path: PathLike) -> np.ndarray:
    return decode_lidar(Path(path).read_bytes())


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧭 Pose files
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def format_poses(poses: Iterable[Pose]) -> str:
    """One ``tx ty tz qx qy qz qw`` line per pose."""
    return "".join(" ".join(repr(float(v)) for v in pose.to_row()) + "\n" for pose in poses)


def parse_poses(text: str) -> List[Pose]:
    """
    Parse the canonical pose format. Blank lines and ``#`` comments are skipped.

    Raises:
        PoseFileError: Naming the first line that is not seven floats
    """
    poses = []
    for number, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != 7:
            raise PoseFileError(f"expected 7 fields, found {len(fields)}", number)
        try:
            row = [float(f) for f in fields]
        except ValueError as e:
            raise PoseFileError(f"not a number: {e}", number) from e
        if not all(math.isfinite(v) for v in row):
            raise PoseFileError("non-finite value", number)
        if not any(row[3:]):
            raise PoseFileError("zero quaternion", number)
        poses.append(Pose.from_row(row))
    return poses


def write_poses(path: PathLike, poses: Iterable[Pose]) -> Path:
    return _write_text(path, format_poses(poses))


def read_poses(path: PathLike) -> List[Pose]:
    return parse_poses(_read_text(path))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🏛️ Scenes
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def write_scene(path: PathLike, scene: Scene) -> Path:
    return _write_text(path, format_scene(scene))


def read_scene(path: PathLike) -> Scene:
    return parse_scene(_read_text(path))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔍 Verification reports
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def format_report(report: VerifyReport) -> str:
    """
    Plain-text report: verdict, thresholds, one ``pair`` line per frame
    pair and one ``frame`` line per minimum depth.
    """
    t = report.thresholds
    lines = [
        REPORT_HEADER,
        f"verdict {'PASS' if report.passed else 'FAIL'}",
        f"thresholds {t.photometric!r} {t.occlusion!r} {t.collision!r} {int(t.strict_occlusion)}",
        f"summary {report.summary()}",
    ]
    for p in report.pairs:
        lines.append(
            f"pair {p.ref} {p.tst} {p.photometric!r} {p.occlusion!r} {p.min_depth!r} "
            f"{int(p.photometric_ok)} {int(p.occlusion_ok)} {int(p.collision_ok)}"
        )
    for i, depth in enumerate(report.frame_min_depths):
        lines.append(f"frame {i} {depth!r}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> VerifyReport:
    report = VerifyReport()
    for number, line in enumerate(text.split("\n"), start=1):
        fields = line.split()
        if not fields or fields[0].startswith("#") or fields[0] in ("verdict", "summary"):
            continue
        try:
            if fields[0] == "thresholds" and len(fields) == 5:
                report.thresholds = VerifyThresholds(
                    float(fields[1]), float(fields[2]), float(fields[3]), bool(int(fields[4]))
                )
            elif fields[0] == "pair" and len(fields) == 9:
                report.pairs.append(
                    PairCheck(
                        int(fields[1]),
                        int(fields[2]),
                        float(fields[3]),
                        float(fields[4]),
                        float(fields[5]),
                        bool(int(fields[6])),
                        bool(int(fields[7])),
                        bool(int(fields[8])),
                    )
                )
            elif fields[0] == "frame" and len(fields) == 3:
                if int(fields[1]) != len(report.frame_min_depths):
                    raise ValueError(f"frame index {fields[1]} out of order")
                report.frame_min_depths.append(float(fields[2]))
            else:
                raise ValueError(f"unrecognized record '{fields[0]}' with {len(fields)} fields")
        except ValueError as e:
            raise FormatError(f"Verify report line {number}: {e}") from e
    return report


def write_report(path: PathLike, report: VerifyReport) -> Path:
    return _write_text(path, format_report(report))


def read_report(path: PathLike) -> VerifyReport:
    return parse_report(_read_text(path))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📊 SLAM outcomes
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def parse_outcomes(text: str) -> List[SequenceOutcome]:
    """``id tracked`` lines, ``tracked`` being 0 or 1."""
    outcomes = []
    for number, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != 2 or fields[1] not in ("0", "1"):
            raise FormatError(f"Outcome line {number}: expected '<id> <0|1>', got '{stripped}'")
        outcomes.append(SequenceOutcome(fields[0], fields[1] == "1"))
    return outcomes


def format_outcomes(outcomes: Sequence[SequenceOutcome]) -> str:
    return "".join(f"{o.sequence_id} {int(o.tracked)}\n" for o in outcomes)


def read_outcomes(path: PathLike) -> List[SequenceOutcome]:
    return parse_outcomes(_read_text(path))


def write_outcomes(path: PathLike, outcomes: Sequence[SequenceOutcome]) -> Path:
    return _write_text(path, format_outcomes(outcomes))
