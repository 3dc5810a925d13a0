#!/usr/bin/env python3
# 🌀 Eidosian Occupancy Mapper
"""
Occupancy mapping and frontier-based exploration.

The map is a dense voxel grid with three states. Depth frames carve free
space along every pixel ray with an exact voxel traversal and mark the
voxel behind each hit as occupied. Exploration repeats

    scan → integrate → detect frontiers → pick a viewpoint → navigate

until no frontier is left or the iteration budget runs out.

Voxel conventions:

- voxel ``(i, j, k)`` covers ``origin + [i, i+1) · res`` along each axis and
  its centre is ``origin + (i + 0.5) · res``
- cells are indexed ``cells[i, j, k]`` (x, y, z) in C order
- a voxel is free once a ray enters it before the hit; the voxel holding
  the hit point nudged slightly along the ray is occupied
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .errors import MappingError, NoViewpointError, PlanningError
from .geom import CameraModel, Pose, RasterImage, depth_valid, look_at, pose_from_body
from .scenesim import Box, Plane, Scene, Triangle, render_depth

logger = logging.getLogger("traj_forge.mapper")

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

# Along-ray slack (meters) around a hit; covers float32 depth rounding
HIT_TOLERANCE = 1e-5

STRUCTURE_6 = ndimage.generate_binary_structure(3, 1)
STRUCTURE_26 = np.ones((3, 3, 3), dtype=bool)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧱 Grid
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class OccupancyGrid:
    """
    Dense 3-D voxel map with unknown / free / occupied states.

    Cells only ever leave the unknown state; :meth:`apply` enforces this.
    """

    def __init__(
        self,
        origin: Sequence[float],
        resolution: float,
        dims: Sequence[int],
        cells: Optional[np.ndarray] = None,
    ):
        self.origin = np.asarray(origin, dtype=np.float64).reshape(3)
        self.resolution = float(resolution)
        self.dims = tuple(int(d) for d in dims)
        if len(self.dims) != 3 or min(self.dims) <= 0:
            raise MappingError(f"Grid dims must be three positive integers, got {dims}")
        if not self.resolution > 0:
            raise MappingError(f"Grid resolution must be positive, got {resolution}")
        if cells is None:
            self.cells = np.zeros(self.dims, dtype=np.uint8)
        else:
            cells = np.asarray(cells, dtype=np.uint8)
            if cells.shape != self.dims:
                raise MappingError(f"Cell array shape {cells.shape} does not match dims {self.dims}")
            if cells.size and cells.max() > OCCUPIED:
                raise MappingError(f"Invalid cell state {int(cells.max())}")
            self.cells = cells.copy()

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float], resolution: float) -> "OccupancyGrid":
        """Grid covering ``lo..hi`` with the origin snapped down to the resolution."""
        lo = np.floor(np.asarray(lo, dtype=np.float64) / resolution) * resolution
        dims = np.ceil((np.asarray(hi, dtype=np.float64) - lo) / resolution - 1e-9).astype(int)
        return cls(lo, resolution, np.maximum(dims, 1))

    @classmethod
    def for_scene(cls, scene: Scene, resolution: float) -> "OccupancyGrid":
        return cls.from_bounds(scene.bounds_lo, scene.bounds_hi, resolution)

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.origin, self.resolution, self.dims, self.cells)

    # Coordinates -------------------------------------------------------
    @property
    def upper(self) -> np.ndarray:
        return self.origin + np.asarray(self.dims) * self.resolution

    def world_to_index(self, points: np.ndarray) -> np.ndarray:
        """Voxel indices ``(..., 3)`` of world points (may be out of range)."""
        return np.floor((np.asarray(points, dtype=np.float64) - self.origin) / self.resolution).astype(np.int64)

    def index_to_world(self, index: np.ndarray) -> np.ndarray:
        """Voxel centres of indices ``(..., 3)``."""
        return self.origin + (np.asarray(index, dtype=np.float64) + 0.5) * self.resolution

    def in_bounds(self, index: np.ndarray) -> np.ndarray:
        index = np.asarray(index)
        return np.all((index >= 0) & (index < np.asarray(self.dims)), axis=-1)

    def contains_point(self, point: Sequence[float]) -> bool:
        return bool(self.in_bounds(self.world_to_index(point)))

    def lookup(self, volume: np.ndarray, points: np.ndarray, outside=False) -> np.ndarray:
        """Sample a per-voxel array at world points; points outside get ``outside``."""
        index = self.world_to_index(points)
        inside = self.in_bounds(index)
        out = np.full(index.shape[:-1], outside, dtype=volume.dtype)
        clipped = np.clip(index, 0, np.asarray(self.dims) - 1)
        values = volume[clipped[..., 0], clipped[..., 1], clipped[..., 2]]
        return np.where(inside, values, out)

    def state_at(self, points: np.ndarray) -> np.ndarray:
        return self.lookup(self.cells, points, outside=UNKNOWN)

    # Statistics --------------------------------------------------------
    @property
    def free(self) -> np.ndarray:
        return self.cells == FREE

    @property
    def occupied(self) -> np.ndarray:
        return self.cells == OCCUPIED

    @property
    def unknown(self) -> np.ndarray:
        return self.cells == UNKNOWN

    def counts(self) -> Tuple[int, int, int]:
        """``(unknown, free, occupied)`` voxel counts."""
        counts = np.bincount(self.cells.ravel(), minlength=3)
        return int(counts[UNKNOWN]), int(counts[FREE]), int(counts[OCCUPIED])

    def apply(self, free_hits: np.ndarray, occupied_hits: np.ndarray) -> int:
        """
        Merge one frame of observations.

        Only unknown voxels change; occupied wins where a voxel was both
        carved and hit in the same frame.

        Returns:
            Number of voxels that changed state
        """
        unknown = self.cells == UNKNOWN
        to_occupied = unknown & occupied_hits
        to_free = unknown & free_hits & ~occupied_hits
        self.cells[to_free] = FREE
        self.cells[to_occupied] = OCCUPIED
        return int(to_free.sum() + to_occupied.sum())

    def __repr__(self) -> str:
        unknown, free, occupied = self.counts()
        return (
            f"OccupancyGrid(dims={self.dims}, res={self.resolution}, "
            f"unknown={unknown}, free={free}, occupied={occupied})"
        )


@dataclass(frozen=True)
class GridParams:
    """Mapping and exploration settings."""

    resolution: float = 0.25
    max_range: float = 12.0
    clearance: float = 0.25
    scan_size: int = 64
    min_view_distance: float = 0.75
    max_view_distance: float = 6.0
    budget: int = 40


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🛡️ Clearance and collision queries
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def clearance_map(grid: OccupancyGrid) -> np.ndarray:
    """
    Metric clearance of every voxel centre.

    Unknown and occupied voxels, and everything outside the grid, count as
    obstacles. The value is the distance to the nearest obstacle voxel
    centre minus half a voxel, i.e. a lower bound on the distance from any
    point of the voxel to an obstacle voxel face aligned to the grid.
    """
    passable = np.pad(grid.cells == FREE, 1, constant_values=False)
    distance = ndimage.distance_transform_edt(passable, sampling=grid.resolution)
    return distance[1:-1, 1:-1, 1:-1] - grid.resolution / 2.0


def safe_mask(grid: OccupancyGrid, clearance: float) -> np.ndarray:
    """Free voxels whose clearance is at least ``clearance`` meters."""
    return (grid.cells == FREE) & (clearance_map(grid) >= clearance - 1e-9)


def segments_clear(
    grid: OccupancyGrid, passable: np.ndarray, starts: np.ndarray, ends: np.ndarray
) -> np.ndarray:
    """
    Check straight segments against a passability volume.

    Each segment is sampled at half-voxel spacing (both endpoints included)
    and is clear iff every sample falls in a passable voxel.

    Args:
        grid: Grid defining the voxel geometry
        passable: Boolean volume with the grid's dims
        starts: Segment starts ``(M, 3)``
        ends: Segment ends ``(M, 3)``

    Returns:
        Boolean array ``(M,)``
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=np.float64))
    ends = np.atleast_2d(np.asarray(ends, dtype=np.float64))
    starts, ends = np.broadcast_arrays(starts, ends)
    if len(starts) == 0:
        return np.zeros(0, dtype=bool)
    lengths = np.linalg.norm(ends - starts, axis=-1)
    counts = np.ceil(lengths / (grid.resolution / 2.0)).astype(np.int64) + 1
    max_count = int(counts.max())
    fractions = np.arange(max_count)[None, :] / np.maximum(counts - 1, 1)[:, None]
    fractions = np.minimum(fractions, 1.0)
    samples = starts[:, None, :] + fractions[..., None] * (ends - starts)[:, None, :]
    return grid.lookup(passable, samples, outside=False).all(axis=1)


def segment_clear(grid: OccupancyGrid, passable: np.ndarray, a: Sequence[float], b: Sequence[float]) -> bool:
    return bool(segments_clear(grid, passable, np.asarray(a)[None], np.asarray(b)[None])[0])


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🗺️ Depth integration
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _hit_voxels(grid: OccupancyGrid, origin: np.ndarray, directions: np.ndarray, hit: np.ndarray) -> np.ndarray:
    """Voxel indices ``(N, 3)`` holding each ray's hit point."""
    res = grid.resolution
    before = np.maximum(hit - HIT_TOLERANCE, 0.0)
    voxel = grid.world_to_index(origin + directions * before[:, None])
    step = np.sign(directions).astype(np.int64)
    with np.errstate(divide="ignore", invalid="ignore"):
        boundary = grid.origin + (voxel + (step > 0)) * res
        crossing = np.where(step != 0, (boundary - origin) / directions, np.inf)
    # Within the 2·tolerance window each axis crosses at most one boundary
    crosses = crossing <= (hit + HIT_TOLERANCE)[:, None]
    return voxel + np.where(crosses, step, 0)


def trace_rays(
    grid: OccupancyGrid,
    origin: np.ndarray,
    directions: np.ndarray,
    free_until: np.ndarray,
    hit_distance: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Voxel traversal for a batch of rays sharing one origin.

    Every voxel the ray passes through is visited once, in order. A voxel
    is carved when the ray enters it before ``free_until`` (minus
    ``HIT_TOLERANCE``). Wherever ``hit_distance`` is finite, the voxel the
    ray occupies at the hit is marked occupied: the traversal is resumed
    just before the hit and steps across exactly those boundaries the ray
    crosses within ``HIT_TOLERANCE`` of it, so a face lying on a voxel
    boundary lands in the voxel behind it while a boundary the ray would
    only reach after the hit is never crossed.

    Args:
        grid: Target grid (read only)
        origin: Shared ray origin ``(3,)``
        directions: Unit directions ``(N, 3)``
        free_until: Ray length up to which space is free ``(N,)``
        hit_distance: Ray length of the surface hit, ``inf`` when none

    Returns:
        ``(free_hits, occupied_hits)`` boolean volumes
    """
    dims = np.asarray(grid.dims)
    res = grid.resolution
    free_hits = np.zeros(grid.dims, dtype=bool)
    occupied_hits = np.zeros(grid.dims, dtype=bool)

    has_hit = np.isfinite(hit_distance)
    if has_hit.any():
        tip_index = _hit_voxels(grid, origin, directions[has_hit], hit_distance[has_hit])
        tip_index = tip_index[grid.in_bounds(tip_index)]
        occupied_hits[tip_index[:, 0], tip_index[:, 1], tip_index[:, 2]] = True

    voxel = np.broadcast_to(grid.world_to_index(origin), directions.shape).copy()
    step = np.sign(directions).astype(np.int64)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_delta = np.where(step != 0, res / np.abs(directions), np.inf)
        boundary = grid.origin + (voxel + (step > 0)) * res
        t_max = np.where(step != 0, (boundary - origin) / directions, np.inf)
    t_entry = np.zeros(len(directions))
    limit = free_until - HIT_TOLERANCE

    active = np.nonzero((t_entry < limit) & grid.in_bounds(voxel))[0]
    voxel, step, t_delta, t_max, t_entry, limit = (
        voxel[active], step[active], t_delta[active], t_max[active], t_entry[active], limit[active]
    )
    while len(active):
        free_hits[voxel[:, 0], voxel[:, 1], voxel[:, 2]] = True
        axis = np.argmin(t_max, axis=1)
        rows = np.arange(len(axis))
        t_entry = t_max[rows, axis]
        voxel[rows, axis] += step[rows, axis]
        t_max[rows, axis] += t_delta[rows, axis]
        keep = (t_entry < limit) & np.all((voxel >= 0) & (voxel < dims), axis=1)
        active = active[keep]
        voxel, step, t_delta, t_max, t_entry, limit = (
            voxel[keep], step[keep], t_delta[keep], t_max[keep], t_entry[keep], limit[keep]
        )
    return free_hits, occupied_hits


def integrate_depth(
    grid: OccupancyGrid,
    depth: RasterImage,
    pose: Pose,
    cam: CameraModel,
    max_range: float = 12.0,
) -> OccupancyGrid:
    """
    Carve one depth frame into the grid in place.

    Rays that miss, or hit beyond ``max_range``, carve free space up to
    ``max_range`` and mark nothing occupied.

    Raises:
        MappingError: If the camera centre lies outside the grid
    """
    if not grid.contains_point(pose.translation):
        raise MappingError(f"Camera position {pose.translation.tolist()} is outside the grid")
    if (depth.width, depth.height) != (cam.width, cam.height):
        raise MappingError(
            f"Depth image is {depth.width}x{depth.height}, camera expects {cam.width}x{cam.height}"
        )
    rays_cam = cam.ray_directions().reshape(-1, 3)
    z = depth.plane().astype(np.float64).ravel()
    valid = depth_valid(z)
    ray_length = np.where(valid, z / rays_cam[:, 2], np.inf)
    hit_distance = np.where(ray_length <= max_range, ray_length, np.inf)
    free_until = np.minimum(ray_length, max_range)
    directions = rays_cam @ pose.rotation_matrix.T
    free_hits, occupied_hits = trace_rays(grid, pose.translation, directions, free_until, hit_distance)
    changed = grid.apply(free_hits, occupied_hits)
    logger.debug(f"🗺️ Integrated frame at {np.round(pose.translation, 3).tolist()}: {changed} voxels changed")
    return grid


def cube_map_poses(position: Sequence[float]) -> List[Pose]:
    """Six 90° views (four horizontal, up, down) covering the full sphere."""
    half_pi = math.pi / 2.0
    poses = [pose_from_body(position, yaw * half_pi) for yaw in range(4)]
    poses.append(pose_from_body(position, 0.0, -half_pi))
    poses.append(pose_from_body(position, 0.0, half_pi))
    return poses


def scan(scene: Scene, grid: OccupancyGrid, position: Sequence[float], params: GridParams) -> int:
    """Render and integrate a cube-map scan; returns the number of changed voxels."""
    cam = CameraModel.from_fov(params.scan_size, params.scan_size, 90.0)
    before = grid.cells.copy()
    for face in cube_map_poses(position):
        integrate_depth(grid, render_depth(scene, face, cam), face, cam, params.max_range)
    return int((before != grid.cells).sum())


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧭 Frontiers and viewpoints
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True, eq=False)
class FrontierCluster:
    """A 26-connected group of frontier voxels."""

    cluster_id: int
    voxels: np.ndarray
    centroid: np.ndarray

    @property
    def size(self) -> int:
        return int(len(self.voxels))


def frontier_mask(grid: OccupancyGrid) -> np.ndarray:
    """Free voxels with at least one 6-neighbour in the unknown state."""
    unknown = np.pad(grid.cells == UNKNOWN, 1, constant_values=False)
    near_unknown = np.zeros(grid.dims, dtype=bool)
    nx, ny, nz = grid.dims
    for axis in range(3):
        for shift in (-1, 1):
            sl = [slice(1, nx + 1), slice(1, ny + 1), slice(1, nz + 1)]
            sl[axis] = slice(1 + shift, 1 + shift + grid.dims[axis])
            near_unknown |= unknown[tuple(sl)]
    return (grid.cells == FREE) & near_unknown


def detect_frontiers(grid: OccupancyGrid) -> List[FrontierCluster]:
    """
    Cluster frontier voxels.

    Returns:
        Clusters sorted by size (largest first), ties broken by the lowest
        voxel index; cluster ids follow that order
    """
    mask = frontier_mask(grid)
    if not mask.any():
        return []
    labels, count = ndimage.label(mask, structure=STRUCTURE_26)
    groups = []
    for label in range(1, count + 1):
        voxels = np.argwhere(labels == label)
        groups.append(voxels)
    groups.sort(key=lambda v: (-len(v), tuple(v[0])))
    return [
        FrontierCluster(i, voxels, grid.index_to_world(voxels).mean(axis=0))
        for i, voxels in enumerate(groups)
    ]


def _reachable_safe(grid: OccupancyGrid, safe: np.ndarray, position: np.ndarray) -> np.ndarray:
    """Safe voxels 26-connected to the voxel at ``position`` (all safe voxels if it is not safe)."""
    index = grid.world_to_index(position)
    if not grid.in_bounds(index) or not safe[tuple(index)]:
        return safe
    labels, _ = ndimage.label(safe, structure=STRUCTURE_26)
    return labels == labels[tuple(index)]


def candidate_viewpoints(
    grid: OccupancyGrid,
    clusters: Sequence[FrontierCluster],
    current: Pose,
    params: GridParams,
    visited: Sequence[np.ndarray] = (),
) -> Iterator[Tuple[FrontierCluster, Pose]]:
    """
    Yield one viewpoint per serviceable cluster, largest cluster first.

    A viewpoint is the centre of a safe voxel reachable from the current
    position, between the min and max view distance from the cluster
    centroid, with free line of sight to it; among those the one nearest
    the current position wins. Voxels within two voxels of a ``visited``
    position are never proposed again.
    """
    safe = safe_mask(grid, params.clearance)
    reachable = _reachable_safe(grid, safe, current.translation)
    candidates = np.argwhere(reachable)
    if len(candidates) == 0:
        return
    centres = grid.index_to_world(candidates)
    if len(visited):
        gap = np.min(
            np.linalg.norm(centres[:, None, :] - np.asarray(visited)[None, :, :], axis=-1), axis=1
        )
        keep = gap > 2.0 * grid.resolution
        candidates, centres = candidates[keep], centres[keep]
        if len(candidates) == 0:
            return
    travel = np.linalg.norm(centres - current.translation, axis=-1)
    free = grid.cells == FREE
    for cluster in sorted(clusters, key=lambda c: (-c.size, c.cluster_id)):
        reach = np.linalg.norm(centres - cluster.centroid, axis=-1)
        in_range = np.nonzero(
            (reach >= params.min_view_distance) & (reach <= min(params.max_view_distance, params.max_range))
        )[0]
        if len(in_range) == 0:
            continue
        order = in_range[np.lexsort((in_range, travel[in_range]))]
        found = None
        for start in range(0, len(order), 256):
            chunk = order[start : start + 256]
            # Stop short of the centroid, which may sit in unobserved space
            direction = cluster.centroid - centres[chunk]
            length = np.linalg.norm(direction, axis=-1, keepdims=True)
            stop = centres[chunk] + direction * np.maximum(length - 1.5 * grid.resolution, 0.0) / length
            clear = segments_clear(grid, free, centres[chunk], stop)
            if clear.any():
                found = chunk[int(np.argmax(clear))]
                break
        if found is None:
            logger.debug(f"🧭 Frontier cluster {cluster.cluster_id} ({cluster.size} voxels) has no viewpoint")
            continue
        yield cluster, look_at(centres[found], cluster.centroid)


def select_next_view(
    grid: OccupancyGrid,
    clusters: Sequence[FrontierCluster],
    current: Pose,
    params: Optional[GridParams] = None,
) -> Pose:
    """
    Pick the next mapping viewpoint.

    Raises:
        NoViewpointError: If no cluster has a reachable viewpoint
    """
    params = params or GridParams()
    if not clusters:
        raise NoViewpointError("No frontier clusters to serve")
    for _, pose in candidate_viewpoints(grid, clusters, current, params):
        return pose
    raise NoViewpointError(f"None of {len(clusters)} frontier clusters has a reachable viewpoint")


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🚀 Exploration
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class ExplorationResult:
    grid: OccupancyGrid
    poses: List[Pose] = field(default_factory=list)
    complete: bool = False
    iterations: int = 0
    frontiers: int = 0


def explore(
    scene: Scene,
    start: Pose,
    params: Optional[GridParams] = None,
    seed: int = 0,
    planner_params=None,
) -> ExplorationResult:
    """
    Map an unknown scene by frontier exploration.

    Args:
        scene: Scene queried only through rendered depth (and the start check)
        start: Initial camera pose
        params: Grid and exploration settings
        seed: Seed for the navigation planner streams
        planner_params: :class:`~traj_forge.planner.RRTParams` for navigation

    Returns:
        The map, the visited viewpoints and whether the run ended with no
        frontiers left

    Raises:
        MappingError: If the start position lies inside an obstacle or
            outside the grid
    """
    from .planner import RRTParams, rrt_star
    from .utils.seeding import stream

    params = params or GridParams()
    planner_params = planner_params or RRTParams(clearance=params.clearance, max_iters=1500)
    grid = OccupancyGrid.for_scene(scene, params.resolution)
    if not grid.contains_point(start.translation):
        raise MappingError(f"Start position {start.translation.tolist()} is outside the scene grid")
    if scene.inside_solid(start.translation[None])[0]:
        raise MappingError(f"Start position {start.translation.tolist()} is inside an obstacle")

    result = ExplorationResult(grid=grid, poses=[start])
    current = start
    discarded: set = set()
    for iteration in range(params.budget):
        result.iterations = iteration + 1
        changed = scan(scene, grid, current.translation, params)
        clusters = detect_frontiers(grid)
        result.frontiers = len(clusters)
        logger.info(
            f"🗺️ Exploration step {iteration + 1}: {changed} voxels updated, {len(clusters)} frontier clusters"
        )
        if not clusters:
            result.complete = True
            break
        open_clusters = [
            c for c in clusters if not discarded.issuperset(map(tuple, c.voxels.tolist()))
        ]
        moved = False
        visited = [p.translation for p in result.poses]
        for cluster, target in candidate_viewpoints(grid, open_clusters, current, params, visited):
            try:
                plan = rrt_star(
                    grid,
                    current.translation,
                    target.translation,
                    planner_params,
                    stream(seed, "mapper.navigate", iteration),
                )
            except PlanningError as e:
                logger.debug(f"🧭 Navigation to cluster {cluster.cluster_id} rejected: {e}")
                plan = None
            if plan is not None and plan.success:
                current = target
                result.poses.append(target)
                moved = True
                break
            discarded.update(map(tuple, cluster.voxels.tolist()))
        if not moved:
            logger.warning(f"⚠️ No reachable frontier left after {iteration + 1} steps; map is partial")
            break
    else:
        clusters = detect_frontiers(grid)
        result.frontiers = len(clusters)
        result.complete = not clusters
        if clusters:
            logger.warning(f"⚠️ Exploration budget of {params.budget} steps exhausted with {len(clusters)} frontiers left")

    if result.complete:
        logger.info(f"✅ Exploration finished after {result.iterations} steps")
    return result


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔮 Oracle maps
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def voxelize_scene(scene: Scene, resolution: float = 0.25, seed_point: Optional[Sequence[float]] = None) -> OccupancyGrid:
    """
    Exact occupancy grid of an analytic scene.

    A voxel is occupied when its centre lies inside a solid or a surface
    primitive passes through it. With ``seed_point`` only the free voxels
    6-connected to it are free and every other free voxel stays unknown;
    without it all non-occupied voxels are free.
    """
    grid = OccupancyGrid.for_scene(scene, resolution)
    index = np.indices(grid.dims).reshape(3, -1).T
    centres = grid.index_to_world(index)
    solid = scene.inside_solid(centres)
    half = resolution / 2.0
    for prim in scene.primitives:
        if isinstance(prim, Plane):
            distance = np.abs((centres - prim.point) @ prim.normal)
            solid |= distance <= half * np.abs(prim.normal).sum()
        elif isinstance(prim, Triangle):
            lo, hi = prim.aabb()
            normal = np.cross(prim.v1 - prim.v0, prim.v2 - prim.v0)
            normal = normal / np.linalg.norm(normal)
            near_plane = np.abs((centres - prim.v0) @ normal) <= half * np.abs(normal).sum()
            in_box = np.all((centres >= lo - half) & (centres <= hi + half), axis=-1)
            solid |= near_plane & in_box
    solid = solid.reshape(grid.dims)
    free = ~solid
    if seed_point is not None:
        seed_index = grid.world_to_index(seed_point)
        if not grid.in_bounds(seed_index) or solid[tuple(seed_index)]:
            raise MappingError(f"Seed point {list(seed_point)} is not in free space")
        labels, _ = ndimage.label(free, structure=STRUCTURE_6)
        free = labels == labels[tuple(seed_index)]
    grid.cells[free] = FREE
    grid.cells[solid] = OCCUPIED
    return grid


def flood_fill_free(grid: OccupancyGrid, seed_point: Sequence[float], passable: Optional[np.ndarray] = None) -> np.ndarray:
    """Voxels 6-connected to ``seed_point`` through ``passable`` (default: free)."""
    passable = grid.cells == FREE if passable is None else passable
    index = grid.world_to_index(seed_point)
    if not grid.in_bounds(index) or not passable[tuple(index)]:
        return np.zeros(grid.dims, dtype=bool)
    labels, _ = ndimage.label(passable, structure=STRUCTURE_6)
    return labels == labels[tuple(index)]
