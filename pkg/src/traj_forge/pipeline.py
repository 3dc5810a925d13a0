#!/usr/bin/env python3
# 🌀 Eidosian Sequence Pipeline
"""
Sequence Pipeline - from scene to verified dataset sequence.

Stages run in order: scene, explore (or the oracle map), plan, render,
labels, verify, stats. The master seed in :class:`PipelineConfig` fixes
every random stream, so the same configuration always writes the same
bytes.

Configuration files are flat YAML with dotted keys::

    seed: 7
    frames: 100
    difficulty: medium
    camera.width: 320
    planner.nodes: 12


Environment variables ``TRAJ_FORGE_<SECTION>_<KEY>`` (``TRAJ_FORGE_<KEY>``
for top-level keys) override file values.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np
import yaml
from tqdm import tqdm

from . import file_formats
from .errors import ConfigError, StageError, TrajForgeError
from .geom import CameraModel, Pose, pose_from_body
from .global_info import frame_file, sequence_file
from .labelgen import DisparityField, LidarSpec, StereoRig, compute_disparity, compute_flow, simulate_lidar
from .mapper import GridParams, OccupancyGrid, clearance_map, explore, voxelize_scene
from .motionstats import format_motion_csv, motion_table
from .planner import PROFILES, RRTParams, SmoothParams, build_graph, get_profile, randomize_poses, sample_loop, smooth_path
from .scenesim import SCENE_KINDS, RenderedFrame, Scene, generate_scene, render_frame
from .sequence_manifest import SequenceManifest
from .utils.paths import resolve_path
from .utils.seeding import derive_seed, stream
from .verify import VerifyReport, VerifyThresholds, check_pair, min_depth

logger = logging.getLogger("traj_forge.pipeline")

ENV_PREFIX = "TRAJ_FORGE_"
TRUE_WORDS = ("true", "1", "yes", "y", "on")
FALSE_WORDS = ("false", "0", "no", "n", "off")


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🔧 Configuration
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class CameraSettings:
    """Pinhole camera shared by both stereo views."""

    width: int = 320
    height: int = 320
    fx: float = 320.0
    fy: float = 320.0
    cx: float = 160.0
    cy: float = 160.0
    baseline: float = 0.25

    def model(self) -> CameraModel:
        return CameraModel(self.fx, self.fy, self.cx, self.cy, self.width, self.height)

    def rig(self) -> StereoRig:
        return StereoRig(self.baseline)


@dataclass(frozen=True)
class GridSettings:
    resolution: float = 0.25
    max_range: float = 12.0
    clearance: float = 0.25
    scan_size: int = 64
    budget: int = 40
    explore: bool = True

    def params(self) -> GridParams:
        return GridParams(
            resolution=self.resolution,
            max_range=self.max_range,
            clearance=self.clearance,
            scan_size=self.scan_size,
            budget=self.budget,
        )


@dataclass(frozen=True)
class PlannerSettings:
    nodes: int = 12
    cutoff: float = 40.0
    step: float = 1.0
    clearance: float = 0.5
    max_iters: int = 800
    goal_bias: float = 0.05
    gamma: float = 8.0
    rewire_radius: float = 3.0
    samples_per_segment: int = 16
    spacing: float = 0.05

    def rrt(self) -> RRTParams:
        return RRTParams(
            step=self.step,
            clearance=self.clearance,
            max_iters=self.max_iters,
            goal_bias=self.goal_bias,
            rewire_radius=self.rewire_radius,
            gamma=self.gamma,
        )

    def smoothing(self) -> SmoothParams:
        return SmoothParams(self.samples_per_segment, self.spacing, self.clearance)


@dataclass(frozen=True)
class LidarSettings:
    """``resolution`` 0 renders the quadrants at the smallest allowed size."""

    enabled: bool = True
    n_lines: int = 32
    fov_min: float = -25.0
    fov_max: float = 15.0
    points_per_line: int = 512
    max_range: float = 50.0
    resolution: int = 0

    def spec(self) -> LidarSpec:
        return LidarSpec(self.n_lines, self.fov_min, self.fov_max, self.points_per_line, self.max_range)


@dataclass(frozen=True)
class VerifySettings:
    photometric: float = 5.0
    occlusion: float = 0.3
    collision: float = 0.25
    strict_occlusion: bool = False
    tau: float = 0.05

    def thresholds(self) -> VerifyThresholds:
        return VerifyThresholds(self.photometric, self.occlusion, self.collision, self.strict_occlusion)


SECTIONS = {
    "camera": CameraSettings,
    "grid": GridSettings,
    "planner": PlannerSettings,
    "lidar": LidarSettings,
    "verify": VerifySettings,
}


@dataclass(frozen=True)
class PipelineConfig:
    """
    Everything one sequence depends on.

    Attributes:
        seed: Master seed for every random stream
        frames: Number of frames to render
        difficulty: ``easy``, ``medium`` or ``hard``
        scene: Scene file (workdir-relative); empty means generate one
        scene_kind: Generator kind used when ``scene`` is empty
        workers: Process count for graph building and rendering
    """

    seed: int = 7
    frames: int = 100
    difficulty: str = "medium"
    scene: str = ""
    scene_kind: str = "room"
    workers: int = 1
    camera: CameraSettings = field(default_factory=CameraSettings)
    grid: GridSettings = field(default_factory=GridSettings)
    planner: PlannerSettings = field(default_factory=PlannerSettings)
    lidar: LidarSettings = field(default_factory=LidarSettings)
    verify: VerifySettings = field(default_factory=VerifySettings)

    def __post_init__(self) -> None:
        if self.frames < 2:
            raise ConfigError(f"frames must be at least 2, got {self.frames}")
        if self.difficulty not in PROFILES:
            raise ConfigError(f"difficulty must be one of {', '.join(PROFILES)}, got '{self.difficulty}'")
        if not self.scene and self.scene_kind not in SCENE_KINDS:
            raise ConfigError(f"scene_kind must be one of {', '.join(SCENE_KINDS)}, got '{self.scene_kind}'")
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")

    def to_flat(self) -> Dict[str, Any]:
        """Dotted-key view of the whole configuration."""
        flat: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in SECTIONS:
                for sub in fields(value):
                    flat[f"{f.name}.{sub.name}"] = getattr(value, sub.name)
            else:
                flat[f.name] = value
        return flat

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_flat(), sort_keys=True, default_flow_style=False)


def _coerce(key: str, value: Any, default: Any) -> Any:
    """Convert ``value`` to the type of ``default``."""
    try:
        if isinstance(default, bool):
            if isinstance(value, bool):
                return value
            word = str(value).strip().lower()
            if word in TRUE_WORDS:
                return True
            if word in FALSE_WORDS:
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if isinstance(default, int):
            if isinstance(value, bool):
                raise ValueError("boolean where an integer is expected")
            if isinstance(value, float):
                if not value.is_integer():
                    raise ValueError(f"not an integer: {value!r}")
                return int(value)
            return int(value)
        if isinstance(default, float):
            if isinstance(value, bool):
                raise ValueError("boolean where a number is expected")
            return float(value)
        if value is None:
            return ""
        if not isinstance(value, str):
            raise ValueError(f"expected text, got {type(value).__name__}")
        return value
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid value for '{key}': {e}") from e


def _flatten(data: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


def config_from_flat(values: Mapping[str, Any], base: Optional[PipelineConfig] = None) -> PipelineConfig:
    """
    Apply dotted-key values on top of ``base``.

    Raises:
        ConfigError: For unknown keys or badly typed values
    """
    base = base or PipelineConfig()
    defaults = base.to_flat()
    top: Dict[str, Any] = {}
    sections: Dict[str, Dict[str, Any]] = {name: {} for name in SECTIONS}
    for key, value in values.items():
        if key not in defaults:
            raise ConfigError(f"Unknown configuration key '{key}'")
        coerced = _coerce(key, value, defaults[key])
        if "." in key:
            section, name = key.split(".", 1)
            sections[section][name] = coerced
        else:
            top[key] = coerced
    for section, changes in sections.items():
        if changes:
            top[section] = replace(getattr(base, section), **changes)
    try:
        return replace(base, **top)
    except TrajForgeError as e:
        raise ConfigError(str(e)) from e


def env_overrides(env: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
    """Collect ``TRAJ_FORGE_*`` variables that name configuration keys."""
    env = os.environ if env is None else env
    found = {}
    for key in PipelineConfig().to_flat():
        name = ENV_PREFIX + key.replace(".", "_").upper()
        if name in env:
            found[key] = env[name]
    return found


def load_config(
    path: Union[str, Path, None] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    env: Optional[Mapping[str, str]] = None,
) -> PipelineConfig:
    """
    Load a configuration: defaults, then the file, then the environment,
    then explicit ``overrides``.

    Raises:
        ConfigError: If the file is unreadable or has unknown keys
    """
    values: Dict[str, Any] = {}
    if path is not None:
        path = resolve_path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        if not isinstance(data, Mapping):
            raise ConfigError(f"Config {path} must be a mapping of keys to values")
        values.update(_flatten(data))
        logger.debug(f"🔧 Loaded {len(values)} config values from {path}")
    values.update(env_overrides(env))
    values.update(overrides or {})
    return config_from_flat(values)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🧱 Stage helpers
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@contextmanager
def stage(name: str, frame: Optional[int] = None) -> Iterator[None]:
    """Re-raise library errors as :class:`StageError` tagged with the stage."""
    try:
        yield
    except StageError:
        raise
    except TrajForgeError as e:
        raise StageError(name, str(e), frame) from e


def load_scene(config: PipelineConfig) -> Scene:
    if config.scene:
        return file_formats.read_scene(resolve_path(config.scene))
    return generate_scene(config.seed, config.scene_kind)


def choose_start(scene: Scene, resolution: float) -> Pose:
    """
    Start pose at the free voxel centre with the most clearance.

    Ties go to the lowest voxel index, so the choice is deterministic.
    """
    oracle = voxelize_scene(scene, resolution)
    clearance = np.where(oracle.free, clearance_map(oracle), -np.inf)
    index = np.unravel_index(int(np.argmax(clearance)), oracle.dims)
    position = oracle.index_to_world(np.asarray(index))
    return pose_from_body(position, 0.0)


def build_map(scene: Scene, config: PipelineConfig) -> Tuple[OccupancyGrid, List[Pose]]:
    """Explored map and viewpoints, or the oracle map when exploration is off."""
    start = choose_start(scene, config.grid.resolution)
    if not config.grid.explore:
        logger.info("🗺️ Exploration disabled; using the oracle map")
        return voxelize_scene(scene, config.grid.resolution, seed_point=start.translation), [start]
    result = explore(
        scene,
        start,
        config.grid.params(),
        seed=derive_seed(config.seed, "mapper.explore"),
        planner_params=RRTParams(clearance=config.grid.clearance, max_iters=1500),
    )
    if not result.complete:
        logger.warning(f"⚠️ Exploration left {result.frontiers} frontier clusters; continuing with a partial map")
    return result.grid, result.poses


def plan_trajectory(grid: OccupancyGrid, config: PipelineConfig) -> List[Pose]:
    """Graph, loop, spline and randomised poses for one sequence."""
    graph = build_graph(
        grid, config.planner.nodes, config.planner.rrt(), seed=config.seed, cutoff=config.planner.cutoff,
        workers=config.workers,
    )
    loop = sample_loop(graph, stream(config.seed, "planner.loop"))
    if not loop.success:
        raise StageError("plan", f"trajectory graph with {len(graph.edges)} edges has no cycle")
    logger.info(f"🧭 Loop through {len(loop.cycle) - 1} nodes, {len(loop.path)} waypoints")
    curve = smooth_path(grid, loop.path, config.planner.smoothing())
    return randomize_poses(
        curve,
        get_profile(config.difficulty),
        stream(config.seed, "planner.poses"),
        n_frames=config.frames,
        grid=grid,
        clearance=config.planner.clearance,
    )


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🎥 Per-frame products
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True, eq=False)
class FrameProducts:
    left: RenderedFrame
    right: RenderedFrame
    disparity: DisparityField
    lidar: Optional[np.ndarray]


def render_products(args) -> FrameProducts:
    """Render both stereo views, the disparity label and the LiDAR scan of one frame."""
    scene, config, pose = args
    cam = config.camera.model()
    rig = config.camera.rig()
    left = render_frame(scene, pose, cam)
    right = render_frame(scene, rig.right_pose(pose), cam)
    disparity = compute_disparity(left.depth, rig, cam, right.depth, config.verify.tau)
    lidar = None
    if config.lidar.enabled:
        resolution = config.lidar.resolution or None
        lidar = simulate_lidar(scene, pose, config.lidar.spec(), resolution)
    return FrameProducts(left, right, disparity, lidar)


@dataclass
class PipelineResult:
    root: Path
    poses: List[Pose]
    report: VerifyReport
    sigma: float
    manifest: SequenceManifest
    explored: bool = True

    @property
    def passed(self) -> bool:
        return self.report.passed


def run_pipeline(
    config: PipelineConfig, output_dir: Union[str, Path], progress: bool = True
) -> PipelineResult:
    """
    Produce one sequence directory.

    Args:
        config: Resolved configuration
        output_dir: Sequence directory (workdir-relative allowed)
        progress: Show tqdm progress bars on stderr

    Returns:
        :class:`PipelineResult`; check ``passed`` for the verification verdict

    Raises:
        StageError: When a stage fails, naming the stage and frame
    """
    root = resolve_path(output_dir)
    root.mkdir(parents=True, exist_ok=True)
    manifest = SequenceManifest(
        root, {"seed": config.seed, "frames": config.frames, "difficulty": config.difficulty}
    )

    def save(path: Path, fmt: str, stream_name: str, frame: Optional[int], writer, payload) -> None:
        writer(path, payload)
        manifest.add(path, fmt, stream_name, frame)

    def save_text(key: str, fmt: str, text: str) -> None:
        path = sequence_file(root, key)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        manifest.add(path, fmt, key)

    save_text("config", "yaml", config.to_yaml())

    with stage("scene"):
        scene = load_scene(config)
        save(sequence_file(root, "scene"), "scene", "scene", None, file_formats.write_scene, scene)
        logger.info(f"🏛️ Scene with {len(scene.primitives)} primitives")

    with stage("explore"):
        grid, viewpoints = build_map(scene, config)
        save(sequence_file(root, "grid"), "tocc", "grid", None, file_formats.write_grid, grid)
        save(
            sequence_file(root, "explored_poses"), "poses", "explored_poses", None,
            file_formats.write_poses, viewpoints,
        )

    with stage("plan"):
        poses = plan_trajectory(grid, config)
        rig = config.camera.rig()
        save(sequence_file(root, "pose_left"), "poses", "pose_left", None, file_formats.write_poses, poses)
        save(
            sequence_file(root, "pose_right"), "poses", "pose_right", None,
            file_formats.write_poses, [rig.right_pose(p) for p in poses],
        )

    cam = config.camera.model()
    thresholds = config.verify.thresholds()
    report = VerifyReport(thresholds=thresholds)
    raster = file_formats.write_raster
    jobs = [(scene, config, pose) for pose in poses]
    pool = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    products = pool.map(render_products, jobs) if pool is not None else map(render_products, jobs)
    previous: Optional[FrameProducts] = None
    try:
        with tqdm(total=len(poses), desc="🎥 Rendering", unit="frame", disable=not progress) as bar:
            for index in range(len(poses)):
                with stage("render", index):
                    frame = next(products)
                    save(frame_file(root, "image_left", index), "ttnr", "image_left", index, raster, frame.left.rgb)
                    save(frame_file(root, "depth_left", index), "ttnr", "depth_left", index, raster, frame.left.depth)
                    save(frame_file(root, "seg_left", index), "ttnr", "seg_left", index, raster, frame.left.seg)
                    save(frame_file(root, "image_right", index), "ttnr", "image_right", index, raster, frame.right.rgb)
                    save(frame_file(root, "depth_right", index), "ttnr", "depth_right", index, raster, frame.right.depth)
                    if frame.lidar is not None:
                        save(
                            frame_file(root, "lidar", index), "tldr", "lidar", index,
                            file_formats.write_lidar, frame.lidar,
                        )

                with stage("labels", index):
                    disparity = frame.disparity
                    save(frame_file(root, "disparity", index, "_disp"), "ttnr", "disparity", index, raster, disparity.disparity)
                    save(frame_file(root, "disparity", index, "_mask"), "ttnr", "disparity_mask", index, raster, disparity.mask)
                    if previous is not None:
                        flow = compute_flow(
                            previous.left.depth, poses[index - 1], poses[index], frame.left.depth, cam,
                            config.verify.tau,
                        )
                        save(frame_file(root, "flow", index - 1, "_flow"), "ttnr", "flow", index - 1, raster, flow.flow)
                        save(frame_file(root, "flow", index - 1, "_mask"), "ttnr", "flow_mask", index - 1, raster, flow.mask)

                with stage("verify", index):
                    report.frame_min_depths.append(min_depth(frame.left.depth))
                    if previous is not None:
                        report.pairs.append(
                            check_pair(
                                index - 1, index, previous.left.rgb, frame.left.rgb, flow,
                                previous.left.depth, frame.left.depth, thresholds,
                            )
                        )
                previous = frame
                bar.update(1)
    finally:
        if pool is not None:
            pool.shutdown()

    save(sequence_file(root, "verify_report"), "report", "verify_report", None, file_formats.write_report, report)

    with stage("stats"):
        sigma, rows = motion_table(poses)
        save_text("motion_stats", "csv", format_motion_csv(sigma, rows))

    manifest.metadata.update({"verdict": "PASS" if report.passed else "FAIL", "sigma": sigma})
    manifest.save()
    if report.passed:
        logger.info(f"✅ Sequence written to {root}: {report.summary()}")
    else:
        logger.error(f"❌ Sequence at {root} failed verification: {report.summary()}")
    return PipelineResult(root, poses, report, sigma, manifest, config.grid.explore)
