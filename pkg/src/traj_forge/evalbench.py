#!/usr/bin/env python3
# 🌀 Eidosian Trajectory Benchmark
"""
Trajectory error metrics and benchmark reports.

- ATE: RMSE of position differences after optional rigid (se3) or
  similarity (sim3) alignment of the estimate onto the ground truth.
- RPE: per-step error transform between consecutive relative motions,
  reported as translation (m/frame) and rotation (deg/frame).
- SR: share of sequences a SLAM system completed without losing track.

Sequences are cut into fixed-length windows before scoring so results
from trajectories of different lengths stay comparable.
"""

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import AlignmentError, EvaluationError
from .geom import Pose, compose, inverse, positions

logger = logging.getLogger("traj_forge.evalbench")

ALIGN_MODES = ("none", "se3", "sim3")
# Eval mode to alignment: monocular runs need scale correction
MODE_ALIGNMENT = {"mono": "sim3", "stereo": "se3", "none": "none"}


@dataclass(frozen=True, eq=False)
class Alignment:
    """Similarity ``x ↦ scale · rotation · x + translation`` from estimate to ground truth."""

    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    @classmethod
    def identity(cls) -> "Alignment":
        return cls(1.0, np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.scale * np.asarray(points) @ self.rotation.T + self.translation

    def apply_pose(self, pose: Pose) -> Pose:
        return Pose.from_rotation_matrix(
            self.rotation @ pose.rotation_matrix, self.apply(pose.translation[None])[0]
        )


def align_similarity(est: np.ndarray, gt: np.ndarray, mode: str = "sim3") -> Alignment:
    """
    Closed-form least-squares alignment of ``est`` onto ``gt`` (Umeyama).

    Args:
        est: Estimated positions ``(N, 3)``
        gt: Ground-truth positions ``(N, 3)``
        mode: ``"sim3"`` (with scale), ``"se3"`` (scale fixed to 1) or ``"none"``

    Raises:
        AlignmentError: With mismatched or fewer than 3 points, or when the
            estimate or the ground truth collapses to a single point
    """
    if mode not in ALIGN_MODES:
        raise AlignmentError(f"Unknown alignment mode '{mode}'")
    est = np.asarray(est, dtype=np.float64).reshape(-1, 3)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 3)
    if est.shape != gt.shape:
        raise AlignmentError(f"Point sets differ in size: {len(est)} vs {len(gt)}")
    if mode == "none":
        return Alignment.identity()
    if len(est) < 3:
        raise AlignmentError(f"Alignment needs at least 3 points, got {len(est)}")

    mu_est = est.mean(axis=0)
    mu_gt = gt.mean(axis=0)
    d_est = est - mu_est
    d_gt = gt - mu_gt
    var_est = float((d_est**2).sum(axis=1).mean())
    if var_est < 1e-18:
        raise AlignmentError("Estimated positions are degenerate (all coincident)")
    if float((d_gt**2).sum(axis=1).mean()) < 1e-18:
        raise AlignmentError("Ground-truth positions are degenerate (all coincident)")

    cov = d_gt.T @ d_est / len(est)
    U, D, Vt = np.linalg.svd(cov)
    S = np.eye(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        S[2, 2] = -1.0
    rotation = U @ S @ Vt
    scale = float(np.trace(np.diag(D) @ S) / var_est) if mode == "sim3" else 1.0
    translation = mu_gt - scale * rotation @ mu_est
    return Alignment(scale, rotation, translation)


@dataclass(frozen=True)
class ErrorStats:
    rmse: float
    mean: float
    median: float

    @classmethod
    def of(cls, errors: np.ndarray) -> "ErrorStats":
        errors = np.asarray(errors, dtype=np.float64)
        if errors.size == 0:
            return cls(0.0, 0.0, 0.0)
        return cls(
            float(np.sqrt(np.mean(errors**2))), float(np.mean(errors)), float(np.median(errors))
        )


def _check_lengths(est: Sequence[Pose], gt: Sequence[Pose], minimum: int) -> None:
    if len(est) != len(gt):
        raise EvaluationError(f"Trajectory lengths differ: estimate {len(est)}, ground truth {len(gt)}")
    if len(gt) < minimum:
        raise EvaluationError(f"Need at least {minimum} poses, got {len(gt)}")


def ate_errors(est: Sequence[Pose], gt: Sequence[Pose], align: str = "se3") -> Tuple[np.ndarray, Alignment]:
    """Per-frame position errors after alignment, plus the alignment used."""
    _check_lengths(est, gt, 1)
    est_xyz = positions(est)
    gt_xyz = positions(gt)
    alignment = align_similarity(est_xyz, gt_xyz, align)
    return np.linalg.norm(alignment.apply(est_xyz) - gt_xyz, axis=1), alignment


def ate(est: Sequence[Pose], gt: Sequence[Pose], align: str = "se3") -> float:
    """Absolute trajectory error (RMSE, meters)."""
    errors, _ = ate_errors(est, gt, align)
    return ErrorStats.of(errors).rmse


def rpe_errors(est: Sequence[Pose], gt: Sequence[Pose], scale: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-step relative pose errors.

    Estimated relative translations are multiplied by ``scale`` first (the
    monocular scale correction).

    Returns:
        ``(translation_errors_m, rotation_errors_deg)``, each ``(N-1,)``
    """
    _check_lengths(est, gt, 2)
    trans, rots = [], []
    for i in range(len(gt) - 1):
        gt_step = compose(inverse(gt[i]), gt[i + 1])
        est_step = compose(inverse(est[i]), est[i + 1])
        if scale != 1.0:
            est_step = Pose(est_step.rotation, est_step.translation * scale)
        error = compose(inverse(gt_step), est_step)
        trans.append(float(np.linalg.norm(error.translation)))
        rots.append(math.degrees(error.angle))
    return np.asarray(trans), np.asarray(rots)


def rpe(est: Sequence[Pose], gt: Sequence[Pose], scale: float = 1.0) -> Tuple[float, float]:
    """Relative pose error RMSE as ``(meters/frame, degrees/frame)``."""
    trans, rots = rpe_errors(est, gt, scale)
    return ErrorStats.of(trans).rmse, ErrorStats.of(rots).rmse


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📏 Evaluation
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class EvalResult:
    ate: float
    rpe_t: float
    rpe_r: float
    aligned: bool
    scale: float
    ate_stats: ErrorStats = field(default_factory=lambda: ErrorStats(0.0, 0.0, 0.0))
    rpe_t_stats: ErrorStats = field(default_factory=lambda: ErrorStats(0.0, 0.0, 0.0))
    rpe_r_stats: ErrorStats = field(default_factory=lambda: ErrorStats(0.0, 0.0, 0.0))


def evaluate(est: Sequence[Pose], gt: Sequence[Pose], mode: str = "stereo") -> EvalResult:
    """
    Score one estimate against ground truth.

    Args:
        est: Estimated poses
        gt: Ground-truth poses, same length
        mode: ``"mono"`` (sim3 alignment, scale-corrected RPE), ``"stereo"``
            (se3 alignment) or ``"none"``
    """
    if mode not in MODE_ALIGNMENT:
        raise EvaluationError(f"Unknown evaluation mode '{mode}', expected mono, stereo or none")
    align = MODE_ALIGNMENT[mode]
    errors, alignment = ate_errors(est, gt, align)
    trans, rots = rpe_errors(est, gt, alignment.scale)
    ate_stats = ErrorStats.of(errors)
    t_stats = ErrorStats.of(trans)
    r_stats = ErrorStats.of(rots)
    return EvalResult(
        ate=ate_stats.rmse,
        rpe_t=t_stats.rmse,
        rpe_r=r_stats.rmse,
        aligned=align != "none",
        scale=alignment.scale,
        ate_stats=ate_stats,
        rpe_t_stats=t_stats,
        rpe_r_stats=r_stats,
    )


@dataclass(frozen=True)
class SequenceWindow:
    source_id: str
    start: int
    poses: Tuple[Pose, ...]

    @property
    def window_id(self) -> str:
        return f"{self.source_id}@{self.start}"


def cut_sequences(sequences: Mapping[str, Sequence[Pose]], length: int = 200) -> List[SequenceWindow]:
    """
    Split every sequence into consecutive non-overlapping windows of ``length`` frames.

    The trailing remainder shorter than ``length`` is dropped.
    """
    if length < 1:
        raise EvaluationError(f"Window length must be positive, got {length}")
    windows = []
    for source_id, poses in sequences.items():
        poses = list(poses)
        for start in range(0, len(poses) - length + 1, length):
            windows.append(SequenceWindow(source_id, start, tuple(poses[start : start + length])))
    return windows


@dataclass(frozen=True)
class SequenceOutcome:
    """Whether an external SLAM run kept track on a sequence."""

    sequence_id: str
    tracked: bool
    estimate: Optional[Tuple[Pose, ...]] = None


def success_rate(outcomes: Sequence[SequenceOutcome]) -> float:
    if not outcomes:
        raise EvaluationError("Success rate of an empty outcome list is undefined")
    return sum(o.tracked for o in outcomes) / len(outcomes)


def summarize_outcomes(outcomes: Sequence[SequenceOutcome]) -> "OrderedDict[str, Dict[str, float]]":
    """
    Success rate per environment and difficulty.

    Outcome ids of the form ``environment/difficulty/...`` are grouped;
    ids without a difficulty part land in the ``all`` column.
    """
    groups: Dict[Tuple[str, str], List[SequenceOutcome]] = {}
    for outcome in outcomes:
        parts = outcome.sequence_id.split("/")
        env = parts[0]
        difficulty = parts[1] if len(parts) > 1 else "all"
        groups.setdefault((env, difficulty), []).append(outcome)
    grid: "OrderedDict[str, Dict[str, float]]" = OrderedDict()
    for (env, difficulty) in sorted(groups):
        grid.setdefault(env, {})[difficulty] = success_rate(groups[(env, difficulty)])
    return grid


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📋 Reports
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def format_eval_report(results: Sequence[Tuple[str, EvalResult]]) -> str:
    """Fixed-column text table with RMSE/mean/median rows per metric."""
    width = max([len(name) for name, _ in results] + [8])
    header = f"{'sequence':<{width}}  {'metric':<6}  {'rmse':>10}  {'mean':>10}  {'median':>10}"
    lines = [header, "-" * len(header)]
    for name, result in results:
        for metric, stats in (("ate", result.ate_stats), ("rpe_t", result.rpe_t_stats), ("rpe_r", result.rpe_r_stats)):
            lines.append(
                f"{name:<{width}}  {metric:<6}  {stats.rmse:>10.6f}  {stats.mean:>10.6f}  {stats.median:>10.6f}"
            )
        lines.append(f"{name:<{width}}  {'scale':<6}  {result.scale:>10.6f}")
    return "\n".join(lines) + "\n"


def format_eval_csv(results: Sequence[Tuple[str, EvalResult]]) -> str:
    lines = ["sequence,ate_rmse,ate_mean,ate_median,rpe_t_rmse,rpe_t_mean,rpe_t_median,rpe_r_rmse,rpe_r_mean,rpe_r_median,aligned,scale"]
    for name, r in results:
        values = []
        for stats in (r.ate_stats, r.rpe_t_stats, r.rpe_r_stats):
            values += [stats.rmse, stats.mean, stats.median]
        lines.append(",".join([name] + [repr(v) for v in values] + [str(int(r.aligned)), repr(r.scale)]))
    return "\n".join(lines) + "\n"


def format_sr_grid(grid: Mapping[str, Mapping[str, float]]) -> str:
    """Environment × difficulty success-rate table; missing cells print ``-``."""
    columns = sorted({d for row in grid.values() for d in row}, key=_difficulty_order)
    width = max([len(env) for env in grid] + [11])
    lines = [f"{'environment':<{width}}" + "".join(f"  {c:>6}" for c in columns)]
    for env, row in grid.items():
        cells = "".join(f"  {row[c]:>6.2f}" if c in row else f"  {'-':>6}" for c in columns)
        lines.append(f"{env:<{width}}{cells}")
    return "\n".join(lines) + "\n"


def _difficulty_order(name: str) -> Tuple[int, str]:
    order = {"easy": 0, "medium": 1, "hard": 2}
    return order.get(name, 3), name
