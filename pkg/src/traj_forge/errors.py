#!/usr/bin/env python3
# 🌀 Eidosian Error Hierarchy
"""
Error types raised across Traj Forge.

Every failure that callers are expected to handle derives from
:class:`TrajForgeError`. Outcomes that are normal results of a search
(a planner that found no path, an acyclic trajectory graph) are returned
as result objects instead.
"""

from typing import Optional


class TrajForgeError(Exception):
    """Base class for all Traj Forge errors."""


class GeometryError(TrajForgeError):
    """Invalid camera model, pose or projection input."""


class SceneFormatError(TrajForgeError):
    """Malformed scene description file."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MappingError(TrajForgeError):
    """Occupancy mapping or exploration failure."""


class NoViewpointError(MappingError):
    """No frontier cluster offers a reachable, collision-free viewpoint."""


class PlanningError(TrajForgeError):
    """Planner inputs are invalid (endpoints in collision, too few nodes)."""


class LabelError(TrajForgeError):
    """Label generation received inconsistent inputs."""


class VerificationError(TrajForgeError):
    """A verification measure could not be computed."""


class AlignmentError(TrajForgeError):
    """Trajectory alignment is ill-posed."""


class EvaluationError(TrajForgeError):
    """Benchmark inputs are inconsistent."""


class ConfigError(TrajForgeError):
    """Unknown configuration key or badly typed value."""


class FormatError(TrajForgeError):
    """Binary or text artifact could not be parsed."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class PoseFileError(FormatError):
    """Canonical pose file violates the seven-float line format."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class StageError(TrajForgeError):
    """A pipeline stage failed; wraps the underlying error."""

    def __init__(self, stage: str, message: str, frame: Optional[int] = None):
        self.stage = stage
        self.frame = frame
        where = f"stage '{stage}'"
        if frame is not None:
            where += f", frame {frame}"
        super().__init__(f"{where}: {message}")
