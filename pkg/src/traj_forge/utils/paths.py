#!/usr/bin/env python3
# 🌀 Eidosian Path Management
"""
Workdir-relative path handling.

Every CLI path is interpreted relative to a single ``--workdir`` root so
that whole runs can be relocated or archived as one directory.
"""

import logging
from pathlib import Path
from typing import Optional, Union

logger = logging.getLogger("traj_forge.paths")

_WORKDIR: Optional[Path] = None


def set_workdir(path: Union[str, Path, None]) -> Path:
    """
    Set the root against which relative paths are resolved.

    Args:
        path: Workdir root; ``None`` means the current directory

    Returns:
        The absolute workdir
    """
    global _WORKDIR
    _WORKDIR = Path(path).resolve() if path is not None else Path.cwd()
    logger.debug(f"Workdir set to {_WORKDIR}")
    return _WORKDIR


def get_workdir() -> Path:
    """Return the active workdir, defaulting to the current directory."""
    if _WORKDIR is None:
        return Path.cwd()
    return _WORKDIR


def resolve_path(path: Union[str, Path], relative_to: Optional[Path] = None) -> Path:
    """
    Resolve a path against the workdir.

    Args:
        path: Path to resolve
        relative_to: Base path for relative paths (workdir if None)

    Returns:
        Resolved absolute path
    """
    path_obj = Path(path)
    if path_obj.is_absolute():
        return path_obj
    base = relative_to if relative_to is not None else get_workdir()
    return (base / path_obj).resolve()


def ensure_dir(path: Union[str, Path]) -> Path:
    """
    Ensure a directory exists.

    Args:
        path: Path to directory (workdir-relative allowed)

    Returns:
        Absolute path to the directory
    """
    path_obj = resolve_path(path)
    path_obj.mkdir(parents=True, exist_ok=True)
    return path_obj
