#!/usr/bin/env python3
# 🌀 Eidosian Label Generator
"""
Dense ground-truth labels from depth and poses.

- Optical flow: every reference pixel is back-projected with its depth,
  moved into the test camera and projected again.
- Stereo disparity: ``fx · baseline / z`` with masks from the same warp
  between the left and right cameras.
- LiDAR: four 90° depth cameras around the sensor, beams interpolated in
  inverse depth from the nearest four pixels.

Mask flags (one u8 plane, 0 = valid)::

    0x01  occluded in the test view
    0x02  lands outside the test image (out of FOV)
    0x04  invalid: no depth, or behind the test camera (also sets 0x02)
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.spatial.transform import Rotation

from .errors import LabelError
from .geom import (
    BODY_FROM_CAMERA,
    CameraModel,
    Pose,
    RasterImage,
    compose,
    depth_valid,
    inverse,
)
from .scenesim import Scene, render_depth

logger = logging.getLogger("traj_forge.labelgen")

FLAG_OCCLUDED = 0x01
FLAG_OUT_OF_FOV = 0x02
FLAG_INVALID = 0x04

OCCLUSION_TAU = 0.05


@dataclass(frozen=True, eq=False)
class FlowField:
    """Flow ``(H, W, 2)`` float32 in pixels and the matching u8 flag mask."""

    flow: RasterImage
    mask: RasterImage

    @property
    def valid(self) -> np.ndarray:
        return self.mask.plane() == 0


@dataclass(frozen=True, eq=False)
class DisparityField:
    disparity: RasterImage
    mask: RasterImage


@dataclass(frozen=True)
class StereoRig:
    """Rectified pair; the right camera sits ``baseline`` meters along left-camera +x."""

    baseline: float = 0.25

    def __post_init__(self) -> None:
        if not self.baseline > 0:
            raise LabelError(f"Stereo baseline must be positive, got {self.baseline}")

    def right_pose(self, left: Pose) -> Pose:
        return compose(left, Pose.from_translation([self.baseline, 0.0, 0.0]))


def bilinear(image: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Bilinear samples of a 2-D image at ``(u, v)``; beyond the border the edge value repeats."""
    coords = np.stack([np.ravel(v), np.ravel(u)])
    return map_coordinates(image, coords, order=1, mode="nearest").reshape(np.shape(u))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🌊 Optical flow
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def warp_depth(
    depth_ref: np.ndarray, pose_ref: Pose, pose_tst: Pose, cam: CameraModel
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Move reference pixels into the test camera.

    Returns:
        ``(points_tst, uv_tst, has_depth)`` with shapes ``(H, W, 3)``,
        ``(H, W, 2)`` and ``(H, W)``
    """
    depth = np.asarray(depth_ref, dtype=np.float64)
    has_depth = depth_valid(depth)
    points_ref = cam.unproject_depth(np.where(has_depth, depth, 1.0))
    relative = compose(inverse(pose_tst), pose_ref)
    points_tst = points_ref @ relative.rotation_matrix.T + relative.translation
    uv_tst, _ = cam.project_points(points_tst)
    return points_tst, uv_tst, has_depth


def compute_flow(
    depth_ref: RasterImage,
    pose_ref: Pose,
    pose_tst: Pose,
    depth_tst: Optional[RasterImage],
    cam: CameraModel,
    tau: float = OCCLUSION_TAU,
) -> FlowField:
    """
    Optical flow from the reference view to the test view.

    Args:
        depth_ref: Reference z-depth
        pose_ref: Reference camera pose
        pose_tst: Test camera pose
        depth_tst: Test z-depth for the occlusion test; ``None`` skips it
        cam: Shared camera model
        tau: Occlusion threshold in meters

    Raises:
        LabelError: If an image size does not match the camera
    """
    for name, image in (("reference depth", depth_ref), ("test depth", depth_tst)):
        if image is not None and (image.width, image.height) != (cam.width, cam.height):
            raise LabelError(
                f"{name} is {image.width}x{image.height}, camera expects {cam.width}x{cam.height}"
            )
    points_tst, uv_tst, has_depth = warp_depth(depth_ref.plane(), pose_ref, pose_tst, cam)
    u_ref, v_ref = cam.pixel_grid()

    z_tst = points_tst[..., 2]
    behind = has_depth & ~(z_tst > 0)
    front = has_depth & (z_tst > 0)
    with np.errstate(invalid="ignore"):
        inside = front & cam.in_image(uv_tst[..., 0], uv_tst[..., 1])

    mask = np.zeros(cam.shape, dtype=np.uint8)
    mask[~has_depth] |= FLAG_INVALID
    mask[behind] |= FLAG_INVALID | FLAG_OUT_OF_FOV
    mask[front & ~inside] |= FLAG_OUT_OF_FOV

    if depth_tst is not None and inside.any():
        sampled = bilinear(
            depth_tst.plane().astype(np.float64), uv_tst[..., 0][inside], uv_tst[..., 1][inside]
        )
        occluded = np.zeros(cam.shape, dtype=bool)
        occluded[inside] = z_tst[inside] - sampled > tau
        mask[occluded] |= FLAG_OCCLUDED

    flow = np.zeros(cam.shape + (2,), dtype=np.float64)
    flow[front, 0] = uv_tst[front, 0] - u_ref[front]
    flow[front, 1] = uv_tst[front, 1] - v_ref[front]
    return FlowField(RasterImage(flow.astype(np.float32)), RasterImage(mask))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 👀 Stereo disparity
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def compute_disparity(
    depth: RasterImage,
    rig: StereoRig,
    cam: CameraModel,
    depth_right: Optional[RasterImage] = None,
    tau: float = OCCLUSION_TAU,
) -> DisparityField:
    """
    Left-view disparity ``fx · baseline / z``.

    Pixels without depth get disparity 0 and flag 0x04. The out-of-FOV
    and occlusion flags come from the left→right warp; the occlusion test
    runs only when ``depth_right`` is given.
    """
    z = depth.plane().astype(np.float64)
    has_depth = depth_valid(z)
    disparity = np.where(has_depth, cam.fx * rig.baseline / np.where(has_depth, z, 1.0), 0.0)
    left = Pose.identity()
    flow = compute_flow(depth, left, rig.right_pose(left), depth_right, cam, tau)
    return DisparityField(RasterImage(disparity.astype(np.float32)), flow.mask)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📡 LiDAR
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# Beyond this elevation a beam at 45° azimuth leaves the 90° camera
MAX_ELEVATION = math.degrees(math.atan(math.cos(math.pi / 4.0)))


@dataclass(frozen=True)
class LidarSpec:
    """Spinning LiDAR layout; angles in degrees, azimuth counter-clockwise from body +x."""

    n_lines: int = 32
    fov_min: float = -25.0
    fov_max: float = 15.0
    points_per_line: int = 512
    max_range: float = 50.0

    def __post_init__(self) -> None:
        if self.n_lines < 1 or self.points_per_line < 1:
            raise LabelError("LiDAR needs at least one line and one point per line")
        if self.n_lines > 1 and not self.fov_max > self.fov_min:
            raise LabelError(f"Vertical FOV {self.fov_min}..{self.fov_max} is not increasing")
        if max(abs(self.fov_min), abs(self.fov_max)) > MAX_ELEVATION:
            raise LabelError(f"Vertical FOV must stay within ±{MAX_ELEVATION:.1f}°")
        if not self.max_range > 0:
            raise LabelError(f"LiDAR max range must be positive, got {self.max_range}")

    def elevations(self) -> np.ndarray:
        if self.n_lines == 1:
            return np.radians([self.fov_min])
        return np.radians(np.linspace(self.fov_min, self.fov_max, self.n_lines))

    def azimuths(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.points_per_line) / self.points_per_line

    def min_separation(self) -> float:
        """Smallest angular gap between neighbouring beams, radians."""
        gaps = [2.0 * np.pi / self.points_per_line]
        if self.n_lines > 1:
            gaps.append(float(np.min(np.diff(self.elevations()))))
        return min(gaps)

    def min_resolution(self) -> int:
        """Smallest square render size at which neighbouring beams fall in different pixels."""
        return int(math.ceil(2.0 / self.min_separation())) + 1


def quadrant_camera(resolution: int) -> CameraModel:
    half = resolution / 2.0
    centre = (resolution - 1) / 2.0
    return CameraModel(half, half, centre, centre, resolution, resolution)


def quadrant_pose(pose: Pose, quadrant: int) -> Pose:
    """Camera of ``pose`` yawed by ``quadrant · 90°`` about the body z axis."""
    world_from_body = pose.rotation_matrix @ BODY_FROM_CAMERA.T
    turn = Rotation.from_euler("z", quadrant * np.pi / 2.0).as_matrix()
    return Pose.from_rotation_matrix(world_from_body @ turn @ BODY_FROM_CAMERA, pose.translation)


def simulate_lidar(
    scene: Scene, pose: Pose, spec: Optional[LidarSpec] = None, resolution: Optional[int] = None
) -> np.ndarray:
    """
    Simulated LiDAR scan in the body frame (x forward, y left, z up).

    Args:
        scene: Scene to scan
        pose: Camera pose the sensor is mounted on
        spec: Beam layout
        resolution: Quadrant render size; defaults to the minimum allowed

    Returns:
        Points ``(M, 3)``; beams without a return, touching a pixel without
        depth, or beyond ``max_range`` are omitted

    Raises:
        LabelError: If ``resolution`` is below :meth:`LidarSpec.min_resolution`
    """
    spec = spec or LidarSpec()
    needed = spec.min_resolution()
    resolution = needed if resolution is None else int(resolution)
    if resolution < needed:
        raise LabelError(
            f"LiDAR render resolution {resolution} is too coarse; at least {needed} px is required"
        )
    cam = quadrant_camera(resolution)
    elevation, azimuth = np.meshgrid(spec.elevations(), spec.azimuths(), indexing="ij")
    elevation, azimuth = elevation.ravel(), azimuth.ravel()
    beams = np.stack(
        [np.cos(elevation) * np.cos(azimuth), np.cos(elevation) * np.sin(azimuth), np.sin(elevation)], axis=1
    )
    quadrant = np.round(azimuth / (np.pi / 2.0)).astype(int) % 4

    ranges = np.full(len(beams), np.nan)
    for q in range(4):
        sel = quadrant == q
        if not sel.any():
            continue
        depth = render_depth(scene, quadrant_pose(pose, q), cam).plane().astype(np.float64)
        rel = azimuth[sel] - q * np.pi / 2.0
        forward = np.cos(elevation[sel]) * np.cos(rel)
        x = -np.cos(elevation[sel]) * np.sin(rel) / forward
        y = -np.sin(elevation[sel]) / forward
        u = np.clip(cam.fx * x + cam.cx, 0.0, resolution - 1.0)
        v = np.clip(cam.fy * y + cam.cy, 0.0, resolution - 1.0)

        u0 = np.minimum(np.floor(u).astype(int), resolution - 2)
        v0 = np.minimum(np.floor(v).astype(int), resolution - 2)
        du, dv = u - u0, v - v0
        corners = [depth[v0, u0], depth[v0, u0 + 1], depth[v0 + 1, u0], depth[v0 + 1, u0 + 1]]
        complete = np.all([depth_valid(c) for c in corners], axis=0)
        inv = [1.0 / np.where(complete, c, 1.0) for c in corners]
        inv_z = (
            inv[0] * (1 - du) * (1 - dv) + inv[1] * du * (1 - dv) + inv[2] * (1 - du) * dv + inv[3] * du * dv
        )
        length = np.sqrt(1.0 + x * x + y * y) / inv_z
        ranges[np.nonzero(sel)[0][complete]] = length[complete]

    keep = np.isfinite(ranges) & (ranges <= spec.max_range)
    points = beams[keep] * ranges[keep, None]
    logger.debug(f"📡 LiDAR scan: {int(keep.sum())}/{len(beams)} returns")
    return points
