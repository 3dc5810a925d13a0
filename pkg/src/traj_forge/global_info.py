#!/usr/bin/env python3
# 🌀 Eidosian Global Information System
"""
Project-wide facts for Traj Forge: identity, the fixed file names of a
sequence directory, and the per-frame stream folders.
"""

import logging
from pathlib import Path
from typing import Dict, Union

from .version import VERSION

logger = logging.getLogger("traj_forge.global_info")

# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🏗️ Project identity
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
PROJECT = {
    "name": "Traj Forge",
    "description": "Synthetic visual-SLAM sequences with verified ground-truth labels",
    "version": VERSION,
    "author": "Lloyd Handyside",
    "organization": "Neuroforge",
    "license": "MIT",
}

# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📂 Sequence directory layout
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
SEQUENCE_FILES = {
    "config": "config.yaml",
    "scene": "scene.txt",
    "grid": "grid.tocc",
    "explored_poses": "explored_poses.txt",
    "pose_left": "pose_left.txt",
    "pose_right": "pose_right.txt",
    "verify_report": "verify_report.txt",
    "motion_stats": "motion_stats.csv",
    "manifest": "manifest.json",
}

# Per-frame folders; flow and disparity hold a data file and a mask per frame
FRAME_DIRS = (
    "image_left",
    "depth_left",
    "seg_left",
    "image_right",
    "depth_right",
    "flow",
    "disparity",
    "lidar",
)


def get_project_info() -> Dict[str, str]:
    return PROJECT


def frame_name(index: int) -> str:
    """Zero-padded frame stem, e.g. ``000042``."""
    return f"{index:06d}"


def sequence_file(root: Union[str, Path], key: str) -> Path:
    """Path of one of the fixed files of a sequence directory."""
    if key not in SEQUENCE_FILES:
        raise KeyError(f"Unknown sequence file '{key}'")
    return Path(root) / SEQUENCE_FILES[key]


def frame_file(root: Union[str, Path], stream: str, index: int, suffix: str = "") -> Path:
    """
    Path of a per-frame artifact.

    Args:
        root: Sequence directory
        stream: One of :data:`FRAME_DIRS`
        index: Frame index
        suffix: ``"_flow"``, ``"_mask"`` or ``"_disp"`` where the stream needs one
    """
    if stream not in FRAME_DIRS:
        raise KeyError(f"Unknown frame stream '{stream}'")
    extension = ".tldr" if stream == "lidar" else ".ttnr"
    if stream == "flow":
        stem = f"{frame_name(index)}_{frame_name(index + 1)}"
    else:
        stem = frame_name(index)
    return Path(root) / stream / f"{stem}{suffix}{extension}"
