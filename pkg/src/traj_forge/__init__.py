#!/usr/bin/env python3
# 🌀 Eidosian Trajectory Forge - Central Package Interface
"""
Traj Forge - synthetic visual-SLAM sequences with verified labels.

A scene is mapped by frontier exploration, looped trajectories are sampled
on the map with RRT* and randomised to a difficulty level, and every frame
is rendered with depth, segmentation, optical flow, stereo disparity and
LiDAR labels that are then checked automatically.
"""

import logging
import os

logging.basicConfig(
    level=logging.INFO if not os.environ.get("TRAJ_FORGE_DEBUG") else logging.DEBUG,
    format="%(asctime)s [%(levelname)8s] %(message)s (%(filename)s:%(lineno)s)"
)
logger = logging.getLogger("traj_forge")

from .version import VERSION as __version__
from .version import get_version_string

from .errors import TrajForgeError
from .geom import CameraModel, Pose, RasterImage, compose, inverse, project, unproject
from .pipeline import PipelineConfig, load_config, run_pipeline
from .run import main as run_cli

__all__ = [
    "__version__",
    "CameraModel",
    "PipelineConfig",
    "Pose",
    "RasterImage",
    "TrajForgeError",
    "compose",
    "inverse",
    "load_config",
    "main",
    "project",
    "run_pipeline",
    "unproject",
]


def main() -> int:
    """
    Command-line entry point.

    Returns:
        int: Exit code (0 for success, non-zero for failure)
    """
    logger.debug("🚀 Traj Forge main entry point invoked")
    return run_cli()


logger.debug(f"🌀 Traj Forge v{get_version_string()} loaded")
