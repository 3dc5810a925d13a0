#!/usr/bin/env python3
# 🌀 Eidosian Command Center
"""
Traj Forge command line.

Each subcommand is one stage of the sequence pipeline, usable on its own
with files in the canonical formats, plus ``pipeline`` which chains them
all. Every path is relative to ``--workdir``.

Exit codes: 0 success, 1 stage or verification failure, 2 usage or
parse error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from colorama import Fore, Style
from colorama import init as colorama_init
from tqdm import tqdm

from . import file_formats
from .errors import ConfigError, FormatError, SceneFormatError, TrajForgeError
from .evalbench import MODE_ALIGNMENT, cut_sequences, evaluate, format_eval_csv, format_eval_report
from .evalbench import format_sr_grid, success_rate, summarize_outcomes
from .geom import pose_from_body
from .global_info import frame_file, get_project_info, sequence_file
from .labelgen import FlowField, compute_disparity, compute_flow
from .mapper import explore, voxelize_scene
from .motionstats import dataset_sigma, format_motion_csv, motion_table, sigma_report
from .pipeline import PipelineConfig, choose_start, load_config, plan_trajectory, render_products, run_pipeline
from .planner import PROFILES
from .scenesim import SCENE_KINDS, generate_scene
from .utils.paths import ensure_dir, resolve_path, set_workdir
from .verify import verify_sequence
from .version import get_version_string

logger = logging.getLogger("traj_forge.run")

LOG_FORMAT = "%(asctime)s [%(levelname)8s] %(message)s (%(filename)s:%(lineno)s)"

USAGE_ERRORS = (ConfigError, FormatError, SceneFormatError, FileNotFoundError)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🎨 Terminal output
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _verdict(passed: bool, text: str) -> str:
    color = Fore.GREEN if passed else Fore.RED
    mark = "✅" if passed else "❌"
    return f"{color}{mark} {text}{Style.RESET_ALL}"


def _config_for(args: argparse.Namespace, sequence: Optional[Path] = None) -> PipelineConfig:
    """Config from ``--config``, else the one archived in ``sequence``, else defaults."""
    if getattr(args, "config", None):
        return load_config(args.config)
    if sequence is not None and sequence_file(sequence, "config").exists():
        return load_config(sequence_file(sequence, "config"))
    return load_config()


def _count_frames(sequence: Path, stream: str) -> int:
    count = 0
    while frame_file(sequence, stream, count).exists():
        count += 1
    return count


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📋 Command implementations
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def cmd_genscene(args: argparse.Namespace) -> int:
    scene = generate_scene(args.seed, args.kind)
    path = file_formats.write_scene(resolve_path(args.out), scene)
    logger.info(f"🏗️ Wrote {args.kind} scene with {len(scene.primitives)} primitives to {path}")
    return 0


def cmd_explore(args: argparse.Namespace) -> int:
    config = _config_for(args)
    scene = file_formats.read_scene(resolve_path(args.scene))
    if args.start:
        start = pose_from_body(np.asarray(args.start, dtype=np.float64), 0.0)
    else:
        start = choose_start(scene, config.grid.resolution)
    if args.oracle:
        grid = voxelize_scene(scene, config.grid.resolution, seed_point=start.translation)
        viewpoints, complete = [start], True
    else:
        result = explore(scene, start, config.grid.params(), seed=args.seed)
        grid, viewpoints, complete = result.grid, result.poses, result.complete
    file_formats.write_grid(resolve_path(args.out), grid)
    if args.poses:
        file_formats.write_poses(resolve_path(args.poses), viewpoints)
    unknown, free, occupied = grid.counts()
    text = f"Map {grid.dims}: {free} free, {occupied} occupied, {unknown} unknown, {len(viewpoints)} viewpoints"
    print(_verdict(complete, text))
    return 0 if complete else 1


def cmd_plan(args: argparse.Namespace) -> int:
    overrides: Dict[str, object] = {"seed": args.seed}
    if args.frames is not None:
        overrides["frames"] = args.frames
    if args.difficulty is not None:
        overrides["difficulty"] = args.difficulty
    config = load_config(args.config, overrides)
    grid = file_formats.read_grid(resolve_path(args.grid))
    poses = plan_trajectory(grid, config)
    file_formats.write_poses(resolve_path(args.out), poses)
    sigma, _ = motion_table(poses)
    print(_verdict(True, f"{len(poses)} {config.difficulty} poses written, motion diversity σ = {sigma:.4f}"))
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    config = load_config(args.config, {} if args.lidar else {"lidar.enabled": False})
    scene = file_formats.read_scene(resolve_path(args.scene))
    poses = file_formats.read_poses(resolve_path(args.poses))
    out = ensure_dir(args.out)
    for index, pose in enumerate(tqdm(poses, desc="🎥 Rendering", unit="frame", disable=args.no_progress)):
        frame = render_products((scene, config, pose))
        file_formats.write_raster(frame_file(out, "image_left", index), frame.left.rgb)
        file_formats.write_raster(frame_file(out, "depth_left", index), frame.left.depth)
        file_formats.write_raster(frame_file(out, "seg_left", index), frame.left.seg)
        file_formats.write_raster(frame_file(out, "image_right", index), frame.right.rgb)
        file_formats.write_raster(frame_file(out, "depth_right", index), frame.right.depth)
        if frame.lidar is not None:
            file_formats.write_lidar(frame_file(out, "lidar", index), frame.lidar)
    file_formats.write_poses(sequence_file(out, "pose_left"), poses)
    print(_verdict(True, f"Rendered {len(poses)} frames into {out}"))
    return 0


def cmd_labels(args: argparse.Namespace) -> int:
    sequence = resolve_path(args.seq)
    config = _config_for(args, sequence)
    cam = config.camera.model()
    rig = config.camera.rig()
    poses = file_formats.read_poses(sequence_file(sequence, "pose_left"))
    n_frames = _count_frames(sequence, "depth_left")
    if n_frames != len(poses):
        raise FormatError(f"{len(poses)} poses but {n_frames} depth images in {sequence}")
    previous = None
    for index in tqdm(range(n_frames), desc="🌊 Labels", unit="frame", disable=args.no_progress):
        depth = file_formats.read_raster(frame_file(sequence, "depth_left", index), "f32")
        right_path = frame_file(sequence, "depth_right", index)
        depth_right = file_formats.read_raster(right_path, "f32") if right_path.exists() else None
        disparity = compute_disparity(depth, rig, cam, depth_right, config.verify.tau)
        file_formats.write_raster(frame_file(sequence, "disparity", index, "_disp"), disparity.disparity)
        file_formats.write_raster(frame_file(sequence, "disparity", index, "_mask"), disparity.mask)
        if previous is not None:
            flow = compute_flow(previous, poses[index - 1], poses[index], depth, cam, config.verify.tau)
            file_formats.write_raster(frame_file(sequence, "flow", index - 1, "_flow"), flow.flow)
            file_formats.write_raster(frame_file(sequence, "flow", index - 1, "_mask"), flow.mask)
        previous = depth
    print(_verdict(True, f"Labels for {n_frames} frames written to {sequence}"))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    sequence = resolve_path(args.seq)
    config = _config_for(args, sequence)
    n_frames = _count_frames(sequence, "image_left")
    rgbs = [file_formats.read_raster(frame_file(sequence, "image_left", i), "u8") for i in range(n_frames)]
    depths = [file_formats.read_raster(frame_file(sequence, "depth_left", i), "f32") for i in range(n_frames)]
    flows = [
        FlowField(
            file_formats.read_raster(frame_file(sequence, "flow", i, "_flow"), "f32"),
            file_formats.read_raster(frame_file(sequence, "flow", i, "_mask"), "u8"),
        )
        for i in range(n_frames - 1)
    ]
    report = verify_sequence(rgbs, depths, flows, config.verify.thresholds())
    file_formats.write_report(sequence_file(sequence, "verify_report"), report)
    print(_verdict(report.passed, report.summary()))
    return 0 if report.passed else 1


def cmd_stats(args: argparse.Namespace) -> int:
    sequences = [file_formats.read_poses(resolve_path(p)) for p in args.poses]
    named = []
    for path, poses in zip(args.poses, sequences):
        sigma, rows = motion_table(poses, args.delta_frame)
        named.append((str(path), sigma))
        if args.out and len(sequences) == 1:
            with open(resolve_path(args.out), "w", encoding="utf-8", newline="\n") as f:
                f.write(format_motion_csv(sigma, rows))
    if len(sequences) > 1:
        named.append(("dataset", dataset_sigma(sequences, args.delta_frame)))
    print(f"{Fore.CYAN}{sigma_report(named)}{Style.RESET_ALL}", end="")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    results = []
    if args.gt and args.est:
        gt = file_formats.read_poses(resolve_path(args.gt))
        est = file_formats.read_poses(resolve_path(args.est))
        if args.cut:
            gt_windows = cut_sequences({"gt": gt}, args.cut)
            est_windows = cut_sequences({"est": est}, args.cut)
            for g, e in zip(gt_windows, est_windows):
                results.append((f"{Path(args.est).stem}@{g.start}", evaluate(e.poses, g.poses, args.mode)))
        else:
            results.append((Path(args.est).stem, evaluate(est, gt, args.mode)))
    elif args.gt or args.est:
        logger.error("❌ --gt and --est must be given together")
        return 2
    text = format_eval_report(results) if results else ""
    if args.outcomes:
        outcomes = file_formats.read_outcomes(resolve_path(args.outcomes))
        text += f"\nsuccess rate {success_rate(outcomes):.4f} over {len(outcomes)} sequences\n"
        text += format_sr_grid(summarize_outcomes(outcomes))
    if not text:
        logger.error("❌ Nothing to evaluate: pass --gt/--est or --outcomes")
        return 2
    print(text, end="")
    if args.report:
        with open(resolve_path(args.report), "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    if args.csv and results:
        with open(resolve_path(args.csv), "w", encoding="utf-8", newline="\n") as f:
            f.write(format_eval_csv(results))
    return 0


def _parse_sets(pairs: Sequence[str]) -> Dict[str, str]:
    values = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got '{pair}'")
        key, value = pair.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def cmd_pipeline(args: argparse.Namespace) -> int:
    overrides: Dict[str, object] = _parse_sets(args.set or [])
    for key in ("seed", "frames", "difficulty", "workers"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    config = load_config(args.config, overrides)
    result = run_pipeline(config, args.out, progress=not args.no_progress)
    print(_verdict(result.passed, result.report.summary()))
    print(f"{Fore.CYAN}📊 Motion diversity σ = {result.sigma:.4f}{Style.RESET_ALL}")
    return 0 if result.passed else 1


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📚 CLI infrastructure
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def create_parser() -> argparse.ArgumentParser:
    info = get_project_info()
    parser = argparse.ArgumentParser(
        prog="traj-forge",
        description=f"🌀 {info['name']} - {info['description']}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Exit codes: 0 success, 1 failure, 2 usage or parse error.",
    )
    parser.add_argument("--version", "-V", action="store_true", help="Show version info")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--workdir", default=None, help="Root for every relative path (default: cwd)")
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    p = subparsers.add_parser("genscene", help="Generate a procedural scene file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=SCENE_KINDS, default="room")
    p.add_argument("--out", default="scene.txt", help="Scene file to write")
    p.set_defaults(func=cmd_genscene)

    p = subparsers.add_parser("explore", help="Map a scene by frontier exploration")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", default="grid.tocc", help="Occupancy grid to write")
    p.add_argument("--poses", default=None, help="Also write the visited viewpoints")
    p.add_argument("--start", type=float, nargs=3, default=None, metavar=("X", "Y", "Z"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle", action="store_true", help="Voxelize the scene instead of exploring")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_explore)

    p = subparsers.add_parser("plan", help="Sample a looped trajectory on a grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", default="pose_left.txt")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--difficulty", choices=sorted(PROFILES), default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_plan)

    p = subparsers.add_parser("render", help="Render stereo images along a pose file")
    p.add_argument("--scene", required=True)
    p.add_argument("--poses", required=True)
    p.add_argument("--out", required=True, help="Sequence directory")
    p.add_argument("--lidar", action="store_true", help="Also simulate LiDAR scans")
    p.add_argument("--config", default=None)
    p.add_argument("--no-progress", action="store_true")
    p.set_defaults(func=cmd_render)

    p = subparsers.add_parser("labels", help="Compute flow and disparity for a rendered sequence")
    p.add_argument("--seq", required=True, help="Sequence directory")
    p.add_argument("--config", default=None)
    p.add_argument("--no-progress", action="store_true")
    p.set_defaults(func=cmd_labels)

    p = subparsers.add_parser("verify", help="Check a labelled sequence")
    p.add_argument("--seq", required=True, help="Sequence directory")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_verify)

    p = subparsers.add_parser("stats", help="Motion diversity of pose files")
    p.add_argument("poses", nargs="+", help="Pose files")
    p.add_argument("--out", default=None, help="CSV of projected motions (single pose file only)")
    p.add_argument("--delta-frame", choices=("body", "world"), default="body")
    p.set_defaults(func=cmd_stats)

    p = subparsers.add_parser("eval", help="ATE/RPE and success rate of SLAM results")
    p.add_argument("--gt", default=None)
    p.add_argument("--est", default=None)
    p.add_argument("--mode", choices=sorted(MODE_ALIGNMENT), default="stereo")
    p.add_argument("--cut", type=int, default=0, help="Evaluate windows of this many frames")
    p.add_argument("--outcomes", default=None, help="Text file of 'id tracked' lines")
    p.add_argument("--report", default=None, help="Write the text report here")
    p.add_argument("--csv", default=None, help="Write the CSV results here")
    p.set_defaults(func=cmd_eval)

    p = subparsers.add_parser("pipeline", help="Run every stage into one sequence directory")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="Sequence directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--difficulty", choices=sorted(PROFILES), default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override a config key")
    p.add_argument("--no-progress", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, configure logging and run one subcommand.

    Returns:
        Process exit code
    """
    parser = create_parser()
    args = parser.parse_args(argv)

    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.debug("Debug mode activated.")

    if args.version:
        info = get_project_info()
        print(f"{info['name']} v{get_version_string()}")
        print(f"{info['description']} ({info['license']})")
        return 0

    func = getattr(args, "func", None)
    if func is None:
        parser.print_help()
        return 2

    colorama_init()
    set_workdir(args.workdir)
    try:
        return func(args)
    except USAGE_ERRORS as e:
        logger.error(f"❌ {e}")
        return 2
    except TrajForgeError as e:
        logger.error(f"❌ {args.command} failed: {e}")
        if logging.getLogger().level <= logging.DEBUG:
            import traceback
            logger.debug(traceback.format_exc())
        return 1


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    sys.exit(main())
