#!/usr/bin/env python3
# 🌀 Eidosian Scene Simulator
"""
Analytic ray-cast renderer.

A :class:`Scene` is a list of primitives (spheres, axis-aligned boxes,
planes, triangles) inside an axis-aligned bounds box. Rendering shoots one
ray per pixel centre and produces:

- depth: camera-frame z of the nearest hit, float32, ``DEPTH_MISS`` on miss
- rgb: procedural albedo under two-sided Lambertian shading, uint8
- seg: object id, uint16, 0 on miss

Shading ignores the viewer, so a surface point has the same colour from
every camera. Scenes round-trip through a plain-text block format
(:func:`parse_scene` / :func:`format_scene`) and can be generated from a
seed (:func:`generate_scene`).
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import GeometryError, SceneFormatError
from .geom import DEPTH_MISS, CameraModel, Pose, RasterImage

logger = logging.getLogger("traj_forge.scenesim")

# Hits closer than this along a ray are ignored
RAY_EPS = 1e-9
# Tolerance on the scene bounds when accepting a hit point
BOUNDS_EPS = 1e-6

LIGHT_DIRECTION = np.array([0.35, 0.55, 0.76]) / np.linalg.norm([0.35, 0.55, 0.76])
AMBIENT = 0.35
DIFFUSE = 0.65

MAX_OBJECT_ID = 65535
TEXTURE_KINDS = ("flat", "checker", "noise", "checker_noise")


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🎨 Procedural textures
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _lattice_hash(ix: np.ndarray, iy: np.ndarray, iz: np.ndarray, seed: int) -> np.ndarray:
    """Hash integer lattice coordinates to floats in ``[0, 1)``."""
    with np.errstate(over="ignore"):
        h = (
            ix.astype(np.uint64) * np.uint64(0x9E3779B185EBCA87)
            ^ iy.astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
            ^ iz.astype(np.uint64) * np.uint64(0x165667B19E3779F9)
            ^ np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        )
        h ^= h >> np.uint64(33)
        h *= np.uint64(0xFF51AFD7ED558CCD)
        h ^= h >> np.uint64(33)
        h *= np.uint64(0xC4CEB9FE1A85EC53)
        h ^= h >> np.uint64(33)
    return (h >> np.uint64(11)).astype(np.float64) / float(1 << 53)


def value_noise(points: np.ndarray, scale: float, seed: int) -> np.ndarray:
    """Smooth trilinear value noise in ``[0, 1)`` sampled at ``points`` ``(N, 3)``."""
    p = points / scale
    base = np.floor(p)
    frac = p - base
    w = frac * frac * (3.0 - 2.0 * frac)
    base = base.astype(np.int64)
    out = np.zeros(len(points))
    for dx in (0, 1):
        wx = w[:, 0] if dx else 1.0 - w[:, 0]
        for dy in (0, 1):
            wy = w[:, 1] if dy else 1.0 - w[:, 1]
            for dz in (0, 1):
                wz = w[:, 2] if dz else 1.0 - w[:, 2]
                corner = _lattice_hash(base[:, 0] + dx, base[:, 1] + dy, base[:, 2] + dz, seed)
                out += wx * wy * wz * corner
    return out


@dataclass(frozen=True)
class Texture:
    """
    Procedural albedo.

    Checker edges are soft (a clipped product of sines) so rendered images
    stay smooth enough for bilinear warping to be accurate.
    """

    kind: str = "flat"
    color: Tuple[float, float, float] = (0.7, 0.7, 0.7)
    color2: Tuple[float, float, float] = (0.2, 0.2, 0.2)
    scale: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in TEXTURE_KINDS:
            raise GeometryError(f"Unknown texture kind '{self.kind}'")
        if not self.scale > 0:
            raise GeometryError(f"Texture scale must be positive, got {self.scale}")

    def albedo(self, points: np.ndarray) -> np.ndarray:
        """Albedo ``(N, 3)`` in ``[0, 1]`` at world points ``(N, 3)``."""
        c1 = np.asarray(self.color, dtype=np.float64)
        c2 = np.asarray(self.color2, dtype=np.float64)
        if self.kind == "flat" or len(points) == 0:
            return np.broadcast_to(c1, (len(points), 3)).copy()
        if self.kind == "checker":
            weight = self._checker(points)
        elif self.kind == "noise":
            weight = value_noise(points, self.scale, self.seed)
        else:
            weight = 0.65 * self._checker(points) + 0.35 * value_noise(points, self.scale / 3.0, self.seed)
        return c1 * weight[:, None] + c2 * (1.0 - weight[:, None])

    def _checker(self, points: np.ndarray) -> np.ndarray:
        phase = np.pi * points / self.scale
        s = np.sin(phase[:, 0]) * np.sin(phase[:, 1]) * np.sin(phase[:, 2])
        return 0.5 + 0.5 * np.clip(2.5 * s, -1.0, 1.0)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔷 Primitives
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _vec3(values: Sequence[float], name: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64).reshape(-1)
    if array.shape != (3,) or not np.all(np.isfinite(array)):
        raise GeometryError(f"{name} must be a finite 3-vector, got {values!r}")
    return array


@dataclass(frozen=True, eq=False)
class Primitive(ABC):
    """Base class: every primitive carries an object id and a texture."""

    object_id: int
    texture: Texture

    shape = "primitive"
    solid = False

    @abstractmethod
    def intersect(self, origins: np.ndarray, directions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Intersect a batch of rays.

        Args:
            origins: Ray origins ``(N, 3)`` or ``(3,)``
            directions: Unit directions ``(N, 3)``

        Returns:
            ``(t, normals)``: distance ``(N,)`` (``inf`` on miss) and unit
            outward normals ``(N, 3)``
        """

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Inside test for solids; surfaces contain nothing."""
        return np.zeros(len(points), dtype=bool)

    @abstractmethod
    def aabb(self) -> Tuple[np.ndarray, np.ndarray]:
        """Axis-aligned bounding box ``(lo, hi)``; unbounded axes use ``inf``."""

    @abstractmethod
    def params(self) -> Dict[str, np.ndarray]:
        """Shape parameters in file order."""


@dataclass(frozen=True, eq=False)
class Sphere(Primitive):
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    radius: float = 1.0

    shape = "sphere"
    solid = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        if not self.radius > 0:
            raise GeometryError(f"Sphere radius must be positive, got {self.radius}")

    def intersect(self, origins, directions):
        oc = origins - self.center
        b = np.sum(oc * directions, axis=-1)
        c = np.sum(oc * oc, axis=-1) - self.radius**2
        disc = b * b - c
        hit = disc >= 0
        root = np.sqrt(np.where(hit, disc, 0.0))
        t_near = -b - root
        t_far = -b + root
        t = np.where(t_near > RAY_EPS, t_near, np.where(t_far > RAY_EPS, t_far, np.inf))
        t = np.where(hit, t, np.inf)
        points = origins + directions * np.where(np.isfinite(t), t, 0.0)[:, None]
        normals = (points - self.center) / self.radius
        return t, normals

    def contains(self, points):
        return np.sum((points - self.center) ** 2, axis=-1) < self.radius**2

    def aabb(self):
        return self.center - self.radius, self.center + self.radius

    def params(self):
        return {"center": self.center, "radius": np.array([self.radius])}


@dataclass(frozen=True, eq=False)
class Box(Primitive):
    """Axis-aligned box given by centre and half extents."""

    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    half_extents: np.ndarray = field(default_factory=lambda: np.ones(3))

    shape = "box"
    solid = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        half = _vec3(self.half_extents, "half_extents")
        if np.any(half <= 0):
            raise GeometryError(f"Box half extents must be positive, got {half.tolist()}")
        object.__setattr__(self, "half_extents", half)

    @classmethod
    def from_corners(cls, object_id: int, texture: Texture, lo: Sequence[float], hi: Sequence[float]) -> "Box":
        lo, hi = np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64)
        return cls(object_id, texture, (lo + hi) / 2.0, (hi - lo) / 2.0)

    def intersect(self, origins, directions):
        lo, hi = self.aabb()
        origins = np.broadcast_to(origins, directions.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / directions
            t1 = (lo - origins) * inv
            t2 = (hi - origins) * inv
        # Parallel rays inside the slab never bound it
        t1 = np.where(np.isnan(t1), -np.inf, t1)
        t2 = np.where(np.isnan(t2), np.inf, t2)
        t_min = np.minimum(t1, t2)
        t_max = np.maximum(t1, t2)
        t_near = t_min.max(axis=-1)
        t_far = t_max.min(axis=-1)
        hit = (t_far >= t_near) & (t_far > RAY_EPS)
        entering = t_near > RAY_EPS
        t = np.where(hit, np.where(entering, t_near, t_far), np.inf)
        axis = np.where(entering, t_min.argmax(axis=-1), t_max.argmin(axis=-1))
        rows = np.arange(len(directions))
        normals = np.zeros_like(directions)
        sign = -np.sign(directions[rows, axis])
        # Leaving the box from inside: the normal points along the ray
        sign = np.where(entering, sign, -sign)
        normals[rows, axis] = np.where(sign == 0, 1.0, sign)
        return t, normals

    def contains(self, points):
        return np.all(np.abs(points - self.center) < self.half_extents, axis=-1)

    def aabb(self):
        return self.center - self.half_extents, self.center + self.half_extents

    def params(self):
        return {"center": self.center, "half_extents": self.half_extents}


@dataclass(frozen=True, eq=False)
class Plane(Primitive):
    point: np.ndarray = field(default_factory=lambda: np.zeros(3))
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    shape = "plane"

    def __post_init__(self) -> None:
        object.__setattr__(self, "point", _vec3(self.point, "point"))
        normal = _vec3(self.normal, "normal")
        norm = np.linalg.norm(normal)
        if norm < 1e-12:
            raise GeometryError("Plane normal must be non-zero")
        object.__setattr__(self, "normal", normal / norm)

    def intersect(self, origins, directions):
        denom = directions @ self.normal
        with np.errstate(divide="ignore", invalid="ignore"):
            t = ((self.point - origins) @ self.normal) / denom
        t = np.where((np.abs(denom) > 1e-15) & (t > RAY_EPS), t, np.inf)
        return t, np.broadcast_to(self.normal, directions.shape).copy()

    def aabb(self):
        lo = np.full(3, -np.inf)
        hi = np.full(3, np.inf)
        axis = int(np.argmax(np.abs(self.normal)))
        if np.isclose(abs(self.normal[axis]), 1.0):
            lo[axis] = hi[axis] = self.point[axis]
        return lo, hi

    def params(self):
        return {"point": self.point, "normal": self.normal}


@dataclass(frozen=True, eq=False)
class Triangle(Primitive):
    v0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v1: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    v2: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))

    shape = "triangle"

    def __post_init__(self) -> None:
        for name in ("v0", "v1", "v2"):
            object.__setattr__(self, name, _vec3(getattr(self, name), name))
        if np.linalg.norm(np.cross(self.v1 - self.v0, self.v2 - self.v0)) < 1e-12:
            raise GeometryError("Triangle is degenerate")

    def intersect(self, origins, directions):
        # Möller–Trumbore
        e1 = self.v1 - self.v0
        e2 = self.v2 - self.v0
        pvec = np.cross(directions, e2)
        det = pvec @ e1
        valid = np.abs(det) > 1e-15
        inv_det = np.where(valid, 1.0 / np.where(valid, det, 1.0), 0.0)
        tvec = np.broadcast_to(origins - self.v0, directions.shape)
        u = np.sum(tvec * pvec, axis=-1) * inv_det
        qvec = np.cross(tvec, e1)
        v = np.sum(qvec * directions, axis=-1) * inv_det
        t = (qvec @ e2) * inv_det
        hit = valid & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > RAY_EPS)
        normal = np.cross(e1, e2)
        normal = normal / np.linalg.norm(normal)
        return np.where(hit, t, np.inf), np.broadcast_to(normal, directions.shape).copy()

    def aabb(self):
        verts = np.stack([self.v0, self.v1, self.v2])
        return verts.min(axis=0), verts.max(axis=0)

    def params(self):
        return {"v0": self.v0, "v1": self.v1, "v2": self.v2}


SHAPES = {cls.shape: cls for cls in (Sphere, Box, Plane, Triangle)}


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🌍 Scenes and ray casting
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True, eq=False)
class Scene:
    """Immutable primitive list plus axis-aligned world bounds."""

    primitives: Tuple[Primitive, ...]
    bounds_lo: np.ndarray
    bounds_hi: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "primitives", tuple(self.primitives))
        lo = _vec3(self.bounds_lo, "bounds_lo")
        hi = _vec3(self.bounds_hi, "bounds_hi")
        if np.any(hi <= lo):
            raise GeometryError(f"Empty scene bounds {lo.tolist()} .. {hi.tolist()}")
        object.__setattr__(self, "bounds_lo", lo)
        object.__setattr__(self, "bounds_hi", hi)
        seen = set()
        for prim in self.primitives:
            if not 0 < prim.object_id <= MAX_OBJECT_ID:
                raise GeometryError(f"Object id {prim.object_id} outside 1..{MAX_OBJECT_ID}")
            if prim.object_id in seen:
                raise GeometryError(f"Duplicate object id {prim.object_id}")
            seen.add(prim.object_id)
            p_lo, p_hi = prim.aabb()
            if np.any(p_hi < lo) or np.any(p_lo > hi):
                raise GeometryError(f"{prim.shape} {prim.object_id} lies outside the scene bounds")

    @property
    def object_ids(self) -> List[int]:
        return [p.object_id for p in self.primitives]

    def primitive(self, object_id: int) -> Primitive:
        for prim in self.primitives:
            if prim.object_id == object_id:
                return prim
        raise KeyError(object_id)

    def inside_bounds(self, points: np.ndarray, tol: float = BOUNDS_EPS) -> np.ndarray:
        return np.all((points >= self.bounds_lo - tol) & (points <= self.bounds_hi + tol), axis=-1)

    def inside_solid(self, points: np.ndarray) -> np.ndarray:
        """True where a point lies strictly inside any solid primitive."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        inside = np.zeros(len(points), dtype=bool)
        for prim in self.primitives:
            if prim.solid:
                inside |= prim.contains(points)
        return inside


@dataclass(frozen=True)
class Hit:
    distance: float
    object_id: int
    normal: Tuple[float, float, float]


@dataclass(frozen=True, eq=False)
class RayBatch:
    """Nearest hits of a ray batch; ``object_ids`` is 0 and ``distance`` inf on miss."""

    distance: np.ndarray
    object_ids: np.ndarray
    normals: np.ndarray
    points: np.ndarray

    @property
    def hit(self) -> np.ndarray:
        return self.object_ids > 0


def cast_rays(scene: Scene, origins: np.ndarray, directions: np.ndarray) -> RayBatch:
    """
    Nearest in-bounds intersection for each ray of a batch.

    Args:
        scene: Scene to intersect
        origins: ``(3,)`` shared origin or ``(N, 3)`` origins
        directions: Unit directions ``(N, 3)``
    """
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    origins = np.asarray(origins, dtype=np.float64)
    count = len(directions)
    best_t = np.full(count, np.inf)
    best_id = np.zeros(count, dtype=np.int64)
    best_n = np.zeros((count, 3))
    for prim in scene.primitives:
        t, normals = prim.intersect(origins, directions)
        finite = np.isfinite(t)
        if not finite.any():
            continue
        points = origins + directions * np.where(finite, t, 0.0)[:, None]
        closer = finite & (t < best_t) & scene.inside_bounds(points)
        best_t = np.where(closer, t, best_t)
        best_id = np.where(closer, prim.object_id, best_id)
        best_n[closer] = normals[closer]
    points = origins + directions * np.where(np.isfinite(best_t), best_t, 0.0)[:, None]
    return RayBatch(best_t, best_id, best_n, points)


def ray_cast(scene: Scene, origin: Sequence[float], direction: Sequence[float]) -> Optional[Hit]:
    """
    Cast one ray.

    Returns:
        The nearest :class:`Hit` with positive distance inside the scene
        bounds, or ``None`` on a miss
    """
    direction = np.asarray(direction, dtype=np.float64)
    norm = np.linalg.norm(direction)
    if norm < 1e-12:
        raise GeometryError("Ray direction must be non-zero")
    batch = cast_rays(scene, np.asarray(origin, dtype=np.float64), (direction / norm)[None, :])
    if not batch.hit[0]:
        return None
    return Hit(float(batch.distance[0]), int(batch.object_ids[0]), tuple(float(v) for v in batch.normals[0]))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🎥 Rendering
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True, eq=False)
class RenderedFrame:
    depth: RasterImage
    rgb: RasterImage
    seg: RasterImage


def shade(scene: Scene, batch: RayBatch) -> np.ndarray:
    """Two-sided Lambertian colour ``(N, 3)`` in ``[0, 1]``; black on miss."""
    colors = np.zeros((len(batch.distance), 3))
    intensity = AMBIENT + DIFFUSE * np.abs(batch.normals @ LIGHT_DIRECTION)
    for prim in scene.primitives:
        sel = batch.object_ids == prim.object_id
        if sel.any():
            colors[sel] = prim.texture.albedo(batch.points[sel]) * intensity[sel, None]
    return np.clip(colors, 0.0, 1.0)


def render_frame(scene: Scene, pose: Pose, cam: CameraModel, with_rgb: bool = True) -> RenderedFrame:
    """Render depth, RGB and segmentation from one ray batch."""
    rays_cam = cam.ray_directions().reshape(-1, 3)
    rays_world = rays_cam @ pose.rotation_matrix.T
    batch = cast_rays(scene, pose.translation, rays_world)
    hit = batch.hit
    z = np.where(hit, batch.distance * rays_cam[:, 2], DEPTH_MISS)
    depth = z.astype(np.float32).reshape(cam.height, cam.width)
    seg = batch.object_ids.astype(np.uint16).reshape(cam.height, cam.width)
    if with_rgb:
        rgb = np.round(shade(scene, batch) * 255.0).astype(np.uint8).reshape(cam.height, cam.width, 3)
    else:
        rgb = np.zeros((cam.height, cam.width, 3), dtype=np.uint8)
    return RenderedFrame(RasterImage(depth), RasterImage(rgb), RasterImage(seg))


def render_depth(scene: Scene, pose: Pose, cam: CameraModel) -> RasterImage:
    return render_frame(scene, pose, cam, with_rgb=False).depth


def render_rgb(scene: Scene, pose: Pose, cam: CameraModel) -> RasterImage:
    return render_frame(scene, pose, cam).rgb


def render_seg(scene: Scene, pose: Pose, cam: CameraModel) -> RasterImage:
    return render_frame(scene, pose, cam, with_rgb=False).seg


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📄 Scene description files
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
#
# Grammar (one key per line, '#' starts a comment):
#
#   bounds = x0 y0 z0 x1 y1 z1
#   [sphere]            center = x y z      radius = r
#   [box]               center = x y z      half_extents = hx hy hz
#   [plane]             point = x y z       normal = nx ny nz
#   [triangle]          v0 = ..  v1 = ..  v2 = ..
#
# Every block also takes: id = N, texture = flat|checker|noise|checker_noise,
# color = r g b, color2 = r g b, scale = s, seed = N.

_TEXTURE_KEYS = ("texture", "color", "color2", "scale", "seed")


def _fmt(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in np.atleast_1d(values))


def format_scene(scene: Scene) -> str:
    """Serialize a scene; floats use ``repr`` so parsing is exact."""
    lines = [f"bounds = {_fmt(np.concatenate([scene.bounds_lo, scene.bounds_hi]))}"]
    for prim in scene.primitives:
        tex = prim.texture
        lines.append("")
        lines.append(f"[{prim.shape}]")
        lines.append(f"id = {prim.object_id}")
        for key, value in prim.params().items():
            lines.append(f"{key} = {_fmt(value)}")
        lines.append(f"texture = {tex.kind}")
        lines.append(f"color = {_fmt(np.asarray(tex.color))}")
        lines.append(f"color2 = {_fmt(np.asarray(tex.color2))}")
        lines.append(f"scale = {repr(float(tex.scale))}")
        lines.append(f"seed = {int(tex.seed)}")
    return "\n".join(lines) + "\n"


def _build_primitive(shape: str, fields: Dict[str, Tuple[str, int]], header_line: int) -> Primitive:
    def floats(key: str, count: int) -> List[float]:
        if key not in fields:
            raise SceneFormatError(f"[{shape}] block is missing '{key}'", header_line)
        text, line = fields[key]
        try:
            values = [float(tok) for tok in text.split()]
        except ValueError:
            raise SceneFormatError(f"'{key}' expects numbers, got '{text}'", line) from None
        if len(values) != count:
            raise SceneFormatError(f"'{key}' expects {count} values, got {len(values)}", line)
        return values

    def integer(key: str, default: Optional[int] = None) -> int:
        if key not in fields:
            if default is None:
                raise SceneFormatError(f"[{shape}] block is missing '{key}'", header_line)
            return default
        text, line = fields[key]
        try:
            return int(text)
        except ValueError:
            raise SceneFormatError(f"'{key}' expects an integer, got '{text}'", line) from None

    allowed = set(_TEXTURE_KEYS) | {"id"} | {
        "sphere": {"center", "radius"},
        "box": {"center", "half_extents"},
        "plane": {"point", "normal"},
        "triangle": {"v0", "v1", "v2"},
    }[shape]
    for key, (_, line) in fields.items():
        if key not in allowed:
            raise SceneFormatError(f"Unknown key '{key}' in [{shape}] block", line)

    texture_kind = fields.get("texture", ("flat", header_line))
    try:
        texture = Texture(
            kind=texture_kind[0],
            color=tuple(floats("color", 3)) if "color" in fields else Texture.color,
            color2=tuple(floats("color2", 3)) if "color2" in fields else Texture.color2,
            scale=floats("scale", 1)[0] if "scale" in fields else 1.0,
            seed=integer("seed", 0),
        )
        object_id = integer("id")
        if shape == "sphere":
            return Sphere(object_id, texture, floats("center", 3), floats("radius", 1)[0])
        if shape == "box":
            return Box(object_id, texture, floats("center", 3), floats("half_extents", 3))
        if shape == "plane":
            return Plane(object_id, texture, floats("point", 3), floats("normal", 3))
        return Triangle(object_id, texture, floats("v0", 3), floats("v1", 3), floats("v2", 3))
    except GeometryError as e:
        raise SceneFormatError(str(e), header_line) from e


def parse_scene(text: str) -> Scene:
    """
    Parse a scene description.

    Raises:
        SceneFormatError: On any grammar violation, naming the line
    """
    bounds: Optional[List[float]] = None
    bounds_line = 0
    blocks: List[Tuple[str, int, Dict[str, Tuple[str, int]]]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            shape = line[1:-1].strip().lower()
            if shape not in SHAPES:
                raise SceneFormatError(f"Unknown primitive '{shape}'", number)
            blocks.append((shape, number, {}))
            continue
        if "=" not in line:
            raise SceneFormatError(f"Expected 'key = value', got '{line}'", number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not blocks:
            if key != "bounds":
                raise SceneFormatError(f"Unexpected key '{key}' before the first block", number)
            try:
                bounds = [float(tok) for tok in value.split()]
            except ValueError:
                raise SceneFormatError(f"'bounds' expects numbers, got '{value}'", number) from None
            if len(bounds) != 6:
                raise SceneFormatError(f"'bounds' expects 6 values, got {len(bounds)}", number)
            bounds_line = number
            continue
        fields = blocks[-1][2]
        if key in fields:
            raise SceneFormatError(f"Duplicate key '{key}'", number)
        fields[key] = (value, number)

    if bounds is None:
        raise SceneFormatError("Missing 'bounds' line", 1)
    primitives = [_build_primitive(shape, fields, line) for shape, line, fields in blocks]
    try:
        return Scene(tuple(primitives), bounds[:3], bounds[3:])
    except GeometryError as e:
        raise SceneFormatError(str(e), bounds_line) from e


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🏗️ Scene generation
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
SCENE_KINDS = ("room", "two_rooms", "cluttered", "empty_room")
WALL = 0.25


class _IdCounter:
    def __init__(self, start: int = 1):
        self.value = start

    def __call__(self) -> int:
        current = self.value
        self.value += 1
        return current


def _random_texture(rng: np.random.Generator) -> Texture:
    return Texture(
        kind="checker_noise",
        color=tuple(float(c) for c in rng.uniform(0.45, 0.95, 3)),
        color2=tuple(float(c) for c in rng.uniform(0.05, 0.4, 3)),
        scale=float(rng.uniform(0.6, 1.4)),
        seed=int(rng.integers(0, 2**31)),
    )


def _shell(
    lo: np.ndarray, hi: np.ndarray, next_id: _IdCounter, rng: np.random.Generator, skip_walls: Sequence[str] = ()
) -> List[Primitive]:
    """Floor, ceiling and four walls enclosing the interior box ``lo..hi``."""
    t = WALL
    slabs = {
        "floor": ([lo[0] - t, lo[1] - t, lo[2] - t], [hi[0] + t, hi[1] + t, lo[2]]),
        "ceiling": ([lo[0] - t, lo[1] - t, hi[2]], [hi[0] + t, hi[1] + t, hi[2] + t]),
        "x_min": ([lo[0] - t, lo[1], lo[2]], [lo[0], hi[1], hi[2]]),
        "x_max": ([hi[0], lo[1], lo[2]], [hi[0] + t, hi[1], hi[2]]),
        "y_min": ([lo[0] - t, lo[1] - t, lo[2]], [hi[0] + t, lo[1], hi[2]]),
        "y_max": ([lo[0] - t, hi[1], lo[2]], [hi[0] + t, hi[1] + t, hi[2]]),
    }
    return [
        Box.from_corners(next_id(), _random_texture(rng), a, b)
        for name, (a, b) in slabs.items()
        if name not in skip_walls
    ]


def closed_room(size: Sequence[float] = (8.0, 8.0, 3.0), seed: int = 0) -> Scene:
    """Empty room with interior ``[0, size]``; walls are 0.25 m thick boxes."""
    rng = np.random.default_rng(seed)
    lo, hi = np.zeros(3), np.asarray(size, dtype=np.float64)
    prims = _shell(lo, hi, _IdCounter(), rng)
    return Scene(tuple(prims), lo - 2 * WALL, hi + 2 * WALL)


def two_rooms(
    size: Sequence[float] = (8.0, 8.0, 3.0), door_width: float = 1.5, door_height: float = 2.25, seed: int = 0
) -> Scene:
    """
    Two rooms side by side along x joined by a door.

    Room A spans ``[0, sx]``, the shared wall ``[sx, sx + 0.25]`` and room
    B ``[sx + 0.25, 2 sx + 0.25]``; the door is centred on the wall.
    """
    rng = np.random.default_rng(seed)
    sx, sy, sz = (float(v) for v in size)
    lo = np.zeros(3)
    hi = np.array([2 * sx + WALL, sy, sz])
    next_id = _IdCounter()
    prims = _shell(lo, hi, next_id, rng)
    y0 = sy / 2.0 - door_width / 2.0
    y1 = sy / 2.0 + door_width / 2.0
    for a, b in (
        ([sx, 0.0, 0.0], [sx + WALL, y0, sz]),
        ([sx, y1, 0.0], [sx + WALL, sy, sz]),
        ([sx, y0, door_height], [sx + WALL, y1, sz]),
    ):
        prims.append(Box.from_corners(next_id(), _random_texture(rng), a, b))
    return Scene(tuple(prims), lo - 2 * WALL, hi + 2 * WALL)


def _snap(value: float, step: float = WALL) -> float:
    return float(np.round(value / step) * step)


def _clutter(
    rng: np.random.Generator, next_id: _IdCounter, lo: np.ndarray, hi: np.ndarray, count: int
) -> List[Primitive]:
    """Grid-aligned pillars and blocks standing on the floor, kept away from the walls."""
    prims: List[Primitive] = []
    margin = 1.5
    for _ in range(count):
        half = np.array([_snap(rng.uniform(0.25, 0.75)), _snap(rng.uniform(0.25, 0.75)), 0.0])
        height = _snap(rng.uniform(0.75, hi[2] - lo[2] - 0.75))
        cx = _snap(rng.uniform(lo[0] + margin + half[0], hi[0] - margin - half[0]))
        cy = _snap(rng.uniform(lo[1] + margin + half[1], hi[1] - margin - half[1]))
        a = [cx - half[0], cy - half[1], lo[2]]
        b = [cx + half[0], cy + half[1], lo[2] + height]
        prims.append(Box.from_corners(next_id(), _random_texture(rng), a, b))
    return prims


def generate_scene(seed: int, kind: str = "room") -> Scene:
    """
    Deterministic procedural scene.

    Kinds:
        ``empty_room``: closed 8×8×3 m room
        ``room``: the same room with two grid-aligned blocks
        ``two_rooms``: two rooms joined by a door
        ``cluttered``: a 10×10×3 m room with five blocks and a floating sphere
    """
    if kind not in SCENE_KINDS:
        raise GeometryError(f"Unknown scene kind '{kind}', expected one of {', '.join(SCENE_KINDS)}")
    rng = np.random.default_rng(seed)
    if kind == "two_rooms":
        return two_rooms(seed=int(rng.integers(0, 2**31)))
    size = np.array([10.0, 10.0, 3.0]) if kind == "cluttered" else np.array([8.0, 8.0, 3.0])
    lo, hi = np.zeros(3), size
    next_id = _IdCounter()
    prims = _shell(lo, hi, next_id, rng)
    if kind == "room":
        prims += _clutter(rng, next_id, lo, hi, 2)
    elif kind == "cluttered":
        prims += _clutter(rng, next_id, lo, hi, 5)
        center = np.array([rng.uniform(3.0, 7.0), rng.uniform(3.0, 7.0), 2.0])
        prims.append(Sphere(next_id(), _random_texture(rng), center, 0.4))
    logger.debug(f"🏗️ Generated {kind} scene with {len(prims)} primitives (seed {seed})")
    return Scene(tuple(prims), lo - 2 * WALL, hi + 2 * WALL)
