#!/usr/bin/env python3
# 🌀 Eidosian Motion Statistics
"""
Motion-pattern diversity of camera trajectories.

Per-frame translation and rotation deltas are stacked into two 3×n
matrices. Their singular values (no mean subtraction) give the principal
motion components. The diversity score

    σ = ½ (√(t₂t₃)/t₁ + √(r₂r₃)/r₁)

is 0 when each matrix has a single dominant direction (a car driving
straight and turning) and 1 when motion is spread evenly over all axes.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .errors import TrajForgeError
from .geom import Pose, compose, inverse, so3_log

logger = logging.getLogger("traj_forge.motionstats")

DELTA_FRAMES = ("body", "world")


@dataclass(frozen=True, eq=False)
class MotionMatrices:
    """Translation deltas ``T`` and so(3) rotation deltas ``R``, both ``(3, n)``."""

    T: np.ndarray
    R: np.ndarray

    @property
    def n(self) -> int:
        return int(self.T.shape[1])


@dataclass(frozen=True, eq=False)
class PrincipalMotion:
    """Sorted singular values and left singular vectors of one motion matrix."""

    values: np.ndarray
    U: np.ndarray


def motion_matrices(poses: Sequence[Pose], delta_frame: str = "body") -> MotionMatrices:
    """
    Build the per-frame delta matrices.

    Args:
        poses: At least two camera poses
        delta_frame: ``"body"`` expresses each delta in the earlier camera
            frame; ``"world"`` uses world-frame position differences and
            world-frame rotation increments

    Raises:
        TrajForgeError: With fewer than two poses or an unknown delta frame
    """
    poses = list(poses)
    if len(poses) < 2:
        raise TrajForgeError(f"Motion statistics need at least 2 poses, got {len(poses)}")
    if delta_frame not in DELTA_FRAMES:
        raise TrajForgeError(f"Unknown delta frame '{delta_frame}', expected body or world")
    trans = np.zeros((3, len(poses) - 1))
    rots = np.zeros((3, len(poses) - 1))
    for i, (a, b) in enumerate(zip(poses[:-1], poses[1:])):
        if delta_frame == "body":
            delta = compose(inverse(a), b)
            trans[:, i] = delta.translation
            rots[:, i] = so3_log(delta.rotation)
        else:
            trans[:, i] = b.translation - a.translation
            rots[:, i] = so3_log(compose(b, inverse(a)).rotation)
    return MotionMatrices(trans, rots)


def principal_motion(matrix: np.ndarray) -> PrincipalMotion:
    """
    Singular values (descending, padded to three) and left singular vectors.

    A zero matrix returns zero values and the identity basis.
    """
    matrix = np.asarray(matrix, dtype=np.float64).reshape(3, -1)
    values = np.zeros(3)
    if matrix.size == 0 or not np.any(matrix):
        return PrincipalMotion(values, np.eye(3))
    U, s, _ = np.linalg.svd(matrix, full_matrices=True)
    values[: len(s)] = s
    return PrincipalMotion(values, U)


def _term(values: np.ndarray) -> float:
    if values[0] <= 0:
        return 0.0
    return float(np.sqrt(values[1] * values[2]) / values[0])


def sigma_from_matrices(motion: MotionMatrices) -> float:
    return 0.5 * (_term(principal_motion(motion.T).values) + _term(principal_motion(motion.R).values))


def diversity_sigma(poses: Sequence[Pose], delta_frame: str = "body") -> float:
    """Motion diversity score in ``[0, 1]``."""
    return sigma_from_matrices(motion_matrices(poses, delta_frame))


def dataset_sigma(sequences: Iterable[Sequence[Pose]], delta_frame: str = "body") -> float:
    """Diversity of several trajectories scored together as one dataset."""
    parts = [motion_matrices(seq, delta_frame) for seq in sequences]
    if not parts:
        raise TrajForgeError("dataset_sigma needs at least one sequence")
    merged = MotionMatrices(np.hstack([p.T for p in parts]), np.hstack([p.R for p in parts]))
    return sigma_from_matrices(merged)


def project_motions(matrix: np.ndarray, principal: PrincipalMotion) -> np.ndarray:
    """Coordinates ``Uᵀ·M`` of each delta in the principal basis."""
    return principal.U.T @ np.asarray(matrix, dtype=np.float64)


def motion_table(poses: Sequence[Pose], delta_frame: str = "body") -> Tuple[float, np.ndarray]:
    """
    σ plus plot-ready rows.

    Returns:
        ``(sigma, rows)`` where ``rows`` is ``(n, 7)``: delta index, three
        projected translation and three projected rotation coordinates
    """
    motion = motion_matrices(poses, delta_frame)
    trans = project_motions(motion.T, principal_motion(motion.T))
    rots = project_motions(motion.R, principal_motion(motion.R))
    rows = np.column_stack([np.arange(motion.n), trans.T, rots.T])
    sigma = sigma_from_matrices(motion)
    logger.info(f"📊 Motion diversity σ = {sigma:.4f} over {motion.n} deltas")
    return sigma, rows


def format_motion_csv(sigma: float, rows: np.ndarray) -> str:
    """CSV text: a ``# sigma`` comment line, a header, then one row per delta."""
    lines = [f"# sigma,{sigma!r}", "frame,t1,t2,t3,r1,r2,r3"]
    for row in rows:
        lines.append(",".join([str(int(row[0]))] + [repr(float(v)) for v in row[1:]]))
    return "\n".join(lines) + "\n"


def sigma_report(named: List[Tuple[str, float]]) -> str:
    """Fixed-column table of named σ values."""
    width = max([len(name) for name, _ in named] + [8])
    lines = [f"{'sequence':<{width}}  sigma"]
    lines += [f"{name:<{width}}  {value:.4f}" for name, value in named]
    return "\n".join(lines) + "\n"
