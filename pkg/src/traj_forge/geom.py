#!/usr/bin/env python3
# 🌀 Eidosian Geometry Core
"""
Rigid-body geometry, pinhole projection and raster containers.

Conventions used everywhere in Traj Forge:

- A :class:`Pose` is the camera-to-world transform ``T_WC``; quaternions
  are stored scalar-last ``(qx, qy, qz, qw)`` and normalised on
  construction.
- Camera frame: x right, y down, z forward.
- World frame: right-handed, gravity along ``-z``.
- Body frame (vehicle, LiDAR): x forward, y left, z up, rigidly attached
  to the camera with the camera looking along body ``+x``.
- Pixel ``(u, v)`` has its centre at integer coordinates; ``u`` is the
  column, ``v`` the row.

Everything is computed in double precision; 32-bit floats only appear in
the raster containers that cross file boundaries.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import GeometryError

logger = logging.getLogger("traj_forge.geom")

ArrayLike = Union[Sequence[float], np.ndarray]

# Tolerance on pixel bounds so round-off at u = 0 does not flip validity
PIXEL_EPS = 1e-9

# Depth value written for rays that hit nothing
DEPTH_MISS = float(np.finfo(np.float32).max)

# Camera axes expressed in the body frame (columns: camera x, y, z)
BODY_FROM_CAMERA = np.array(
    [
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
    ]
)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📐 Poses
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True, eq=False)
class Pose:
    """
    Rigid transform mapping camera coordinates to world coordinates.

    Attributes:
        rotation: Unit quaternion ``(qx, qy, qz, qw)``
        translation: Camera centre in the world frame, meters
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        quat = np.array(self.rotation, dtype=np.float64).reshape(4)
        norm = float(np.linalg.norm(quat))
        if not math.isfinite(norm) or norm < 1e-12:
            raise GeometryError(f"Quaternion {quat.tolist()} cannot be normalised")
        trans = np.array(self.translation, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(trans)):
            raise GeometryError(f"Translation {trans.tolist()} is not finite")
        object.__setattr__(self, "rotation", _frozen(quat / norm))
        object.__setattr__(self, "translation", _frozen(trans))

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.array([0.0, 0.0, 0.0, 1.0]), np.zeros(3))

    @classmethod
    def from_translation(cls, translation: ArrayLike) -> "Pose":
        return cls(np.array([0.0, 0.0, 0.0, 1.0]), np.asarray(translation, dtype=np.float64))

    @classmethod
    def from_rotation_matrix(cls, matrix: np.ndarray, translation: ArrayLike = (0.0, 0.0, 0.0)) -> "Pose":
        quat = Rotation.from_matrix(np.asarray(matrix, dtype=np.float64)).as_quat()
        return cls(quat, np.asarray(translation, dtype=np.float64))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Pose":
        """Build a pose from a 4×4 homogeneous matrix."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (4, 4):
            raise GeometryError(f"Expected a 4x4 matrix, got shape {matrix.shape}")
        return cls.from_rotation_matrix(matrix[:3, :3], matrix[:3, 3])

    @classmethod
    def from_row(cls, row: ArrayLike) -> "Pose":
        """Build a pose from the canonical ``tx ty tz qx qy qz qw`` row."""
        values = np.asarray(row, dtype=np.float64).reshape(7)
        return cls(values[3:], values[:3])

    def to_row(self) -> np.ndarray:
        """Return the canonical ``tx ty tz qx qy qz qw`` row."""
        return np.concatenate([self.translation, self.rotation])

    @property
    def rotation_matrix(self) -> np.ndarray:
        return Rotation.from_quat(self.rotation).as_matrix()

    def matrix(self) -> np.ndarray:
        """Return the 4×4 homogeneous matrix."""
        out = np.eye(4)
        out[:3, :3] = self.rotation_matrix
        out[:3, 3] = self.translation
        return out

    @property
    def angle(self) -> float:
        """Rotation angle in radians, in ``[0, pi]``."""
        return float(np.linalg.norm(so3_log(self.rotation)))

    def transform_points(self, points: np.ndarray) -> np.ndarray:
        """Map camera-frame points ``(..., 3)`` into the world frame."""
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation_matrix.T + self.translation

    def __matmul__(self, other: "Pose") -> "Pose":
        return compose(self, other)

    def allclose(self, other: "Pose", tol: float = 1e-9) -> bool:
        """Compare rotation angle and translation distance against ``tol``."""
        delta = compose(inverse(self), other)
        return delta.angle <= tol and float(np.linalg.norm(self.translation - other.translation)) <= tol

    def __repr__(self) -> str:
        t = ", ".join(f"{v:.4f}" for v in self.translation)
        q = ", ".join(f"{v:.4f}" for v in self.rotation)
        return f"Pose(t=[{t}], q=[{q}])"


def compose(a: Pose, b: Pose) -> Pose:
    """
    Compose two poses: the result applies ``b`` first, then ``a``.

    Args:
        a: Outer transform
        b: Inner transform

    Returns:
        ``a ∘ b``
    """
    rot_a = Rotation.from_quat(a.rotation)
    quat = (rot_a * Rotation.from_quat(b.rotation)).as_quat()
    return Pose(quat, rot_a.apply(b.translation) + a.translation)


def inverse(pose: Pose) -> Pose:
    """Return the inverse transform so that ``compose(p, inverse(p))`` is identity."""
    conj = pose.rotation * np.array([-1.0, -1.0, -1.0, 1.0])
    return Pose(conj, -Rotation.from_quat(conj).apply(pose.translation))


def relative(a: Pose, b: Pose) -> Pose:
    """Transform of ``b`` expressed in the frame of ``a`` (``a⁻¹ ∘ b``)."""
    return compose(inverse(a), b)


def so3_log(quat: ArrayLike) -> np.ndarray:
    """
    Logarithm map of a unit quaternion to an axis-angle vector.

    The returned vector has norm in ``[0, pi]``; small angles use the
    series expansion inside scipy's rotation-vector conversion.
    """
    return Rotation.from_quat(np.asarray(quat, dtype=np.float64)).as_rotvec()


def so3_exp(vector: ArrayLike) -> np.ndarray:
    """Exponential map of an axis-angle vector to a unit quaternion ``(x, y, z, w)``."""
    return Rotation.from_rotvec(np.asarray(vector, dtype=np.float64)).as_quat()


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧭 Body-frame helpers
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def pose_from_body(position: ArrayLike, yaw: float, pitch: float = 0.0, roll: float = 0.0) -> Pose:
    """
    Build a camera pose from a body position and yaw/pitch/roll.

    Angles follow the intrinsic z-y-x convention in the body frame; with all
    angles zero the camera looks along world ``+x`` with its image ``y``
    pointing down.
    """
    world_from_body = Rotation.from_euler("ZYX", [yaw, pitch, roll]).as_matrix()
    return Pose.from_rotation_matrix(world_from_body @ BODY_FROM_CAMERA, position)


def body_euler(pose: Pose) -> Tuple[float, float, float]:
    """Return ``(yaw, pitch, roll)`` of the body frame attached to ``pose``."""
    world_from_body = pose.rotation_matrix @ BODY_FROM_CAMERA.T
    yaw, pitch, roll = Rotation.from_matrix(world_from_body).as_euler("ZYX")
    return float(yaw), float(pitch), float(roll)


def look_at(position: ArrayLike, target: ArrayLike) -> Pose:
    """Pose at ``position`` whose optical axis points at ``target`` with zero roll."""
    position = np.asarray(position, dtype=np.float64)
    delta = np.asarray(target, dtype=np.float64) - position
    horizontal = math.hypot(delta[0], delta[1])
    if horizontal < 1e-12 and abs(delta[2]) < 1e-12:
        return pose_from_body(position, 0.0)
    yaw = math.atan2(delta[1], delta[0]) if horizontal >= 1e-12 else 0.0
    pitch = -math.atan2(delta[2], horizontal)
    return pose_from_body(position, yaw, pitch, 0.0)


def wrap_angle(angle: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Wrap angles to ``[-pi, pi)``."""
    return (np.asarray(angle) + np.pi) % (2.0 * np.pi) - np.pi


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📷 Pinhole camera
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus image size, all in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise GeometryError(f"Focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(f"Image size must be positive, got {self.width}x{self.height}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise GeometryError(
                f"Principal point ({self.cx}, {self.cy}) outside the {self.width}x{self.height} image"
            )

    @classmethod
    def from_fov(cls, width: int, height: int, fov_deg: float) -> "CameraModel":
        """Square-pixel camera whose horizontal FOV spans the full image width."""
        focal = (width / 2.0) / math.tan(math.radians(fov_deg) / 2.0)
        return cls(focal, focal, (width - 1) / 2.0, (height - 1) / 2.0, width, height)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def pixel_grid(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return ``(u, v)`` pixel-centre coordinate arrays of shape ``(H, W)``."""
        v, u = np.mgrid[0 : self.height, 0 : self.width].astype(np.float64)
        return u, v

    def ray_directions(self) -> np.ndarray:
        """Unit camera-frame ray directions through every pixel centre, ``(H, W, 3)``."""
        u, v = self.pixel_grid()
        rays = np.stack([(u - self.cx) / self.fx, (v - self.cy) / self.fy, np.ones_like(u)], axis=-1)
        return rays / np.linalg.norm(rays, axis=-1, keepdims=True)

    def in_image(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return (
            (u >= -PIXEL_EPS)
            & (u < self.width)
            & (v >= -PIXEL_EPS)
            & (v < self.height)
        )

    def project_points(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Project camera-frame points.

        Args:
            points: Array ``(..., 3)`` in the camera frame

        Returns:
            ``(uv, valid)`` where ``uv`` has shape ``(..., 2)`` (NaN behind
            the camera) and ``valid`` flags points in front of the camera
            that land inside the image
        """
        points = np.asarray(points, dtype=np.float64)
        z = points[..., 2]
        front = z > 0
        safe_z = np.where(front, z, 1.0)
        u = np.where(front, self.fx * points[..., 0] / safe_z + self.cx, np.nan)
        v = np.where(front, self.fy * points[..., 1] / safe_z + self.cy, np.nan)
        with np.errstate(invalid="ignore"):
            valid = front & self.in_image(u, v)
        return np.stack([u, v], axis=-1), valid

    def unproject_depth(self, depth: np.ndarray) -> np.ndarray:
        """Back-project a z-depth image ``(H, W)`` to camera-frame points ``(H, W, 3)``."""
        depth = np.asarray(depth, dtype=np.float64)
        u, v = self.pixel_grid()
        return np.stack([(u - self.cx) / self.fx * depth, (v - self.cy) / self.fy * depth, depth], axis=-1)


def project(cam: CameraModel, point: ArrayLike) -> Tuple[float, float, bool]:
    """
    Project one camera-frame point.

    Returns:
        ``(u, v, valid)``; ``valid`` is False behind the camera or outside
        ``[0, width) × [0, height)``
    """
    uv, valid = cam.project_points(np.asarray(point, dtype=np.float64).reshape(1, 3))
    return float(uv[0, 0]), float(uv[0, 1]), bool(valid[0])


def unproject(cam: CameraModel, u: float, v: float, depth: float) -> np.ndarray:
    """
    Back-project a pixel with known z-depth into the camera frame.

    Raises:
        GeometryError: If ``depth`` is not positive
    """
    if not depth > 0:
        raise GeometryError(f"Depth must be positive, got {depth}")
    return np.array([(u - cam.cx) / cam.fx * depth, (v - cam.cy) / cam.fy * depth, float(depth)])


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🖼️ Raster images
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
DTYPE_TAGS = {np.dtype(np.uint8): "u8", np.dtype(np.uint16): "u16", np.dtype(np.float32): "f32"}


@dataclass(frozen=True, eq=False)
class RasterImage:
    """
    Typed 2-D grid with interleaved channels.

    ``data`` always has shape ``(height, width, channels)`` and one of the
    dtypes ``uint8``, ``uint16`` or ``float32``.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        array = np.asarray(self.data)
        if array.ndim == 2:
            array = array[:, :, None]
        if array.ndim != 3:
            raise GeometryError(f"Raster data must be 2-D or 3-D, got shape {array.shape}")
        if array.dtype not in DTYPE_TAGS:
            raise GeometryError(f"Unsupported raster dtype {array.dtype}")
        array = np.ascontiguousarray(array).copy()
        object.__setattr__(self, "data", _frozen(array))

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def channels(self) -> int:
        return int(self.data.shape[2])

    @property
    def dtype(self) -> str:
        return DTYPE_TAGS[self.data.dtype]

    @property
    def nbytes(self) -> int:
        return self.width * self.height * self.channels * self.data.dtype.itemsize

    def plane(self, channel: int = 0) -> np.ndarray:
        """Return one channel as an ``(H, W)`` view."""
        return self.data[:, :, channel]

    def same_size(self, other: "RasterImage") -> bool:
        return self.width == other.width and self.height == other.height

    def equals(self, other: "RasterImage") -> bool:
        """Bit-exact comparison of dtype, shape and contents."""
        return (
            self.data.dtype == other.data.dtype
            and self.data.shape == other.data.shape
            and self.data.tobytes() == other.data.tobytes()
        )

    def __repr__(self) -> str:
        return f"RasterImage({self.width}x{self.height}x{self.channels} {self.dtype})"


def depth_valid(depth: np.ndarray) -> np.ndarray:
    """Mask of finite, positive depth samples (misses use :data:`DEPTH_MISS`)."""
    depth = np.asarray(depth)
    return np.isfinite(depth) & (depth > 0) & (depth < DEPTH_MISS)


def stack_poses(poses: Iterable[Pose]) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(translations (N, 3), quaternions (N, 4))`` for a pose sequence."""
    poses = list(poses)
    if not poses:
        return np.zeros((0, 3)), np.zeros((0, 4))
    return np.stack([p.translation for p in poses]), np.stack([p.rotation for p in poses])


def positions(poses: Iterable[Pose], dtype: Optional[type] = None) -> np.ndarray:
    """Stack pose translations into an ``(N, 3)`` array."""
    out = stack_poses(poses)[0]
    return out.astype(dtype) if dtype is not None else out
