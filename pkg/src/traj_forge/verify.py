#!/usr/bin/env python3
# 🌀 Eidosian Data Verification
"""
Automatic checks on a rendered sequence.

- Photometric: warp the reference RGB into the test view with the flow and
  measure the mean RGB distance over valid pixels. A large value means
  poses and images are out of sync.
- Occlusion area: fraction of flagged flow pixels; large fractions mark
  frames that are hard to use.
- Collision: minimum finite depth per frame; a camera too close to
  geometry has gone through it.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import VerificationError
from .geom import RasterImage, depth_valid
from .labelgen import FlowField, bilinear

logger = logging.getLogger("traj_forge.verify")

# Largest possible RGB distance
MAX_PHOTOMETRIC = 255.0 * math.sqrt(3.0)


@dataclass(frozen=True)
class VerifyThresholds:
    photometric: float = 5.0
    occlusion: float = 0.3
    collision: float = 0.25
    strict_occlusion: bool = False


def warp_photometric_error(rgb_ref: RasterImage, rgb_tst: RasterImage, flow: FlowField) -> float:
    """
    Mean RGB distance between reference pixels and their flow targets.

    Raises:
        VerificationError: On mismatched sizes or when no pixel is valid
    """
    if not (rgb_ref.same_size(rgb_tst) and rgb_ref.same_size(flow.flow)):
        raise VerificationError("RGB images and flow must have the same size")
    valid = flow.valid
    if not valid.any():
        raise VerificationError("No valid pixels to compare")
    uv = flow.flow.data.astype(np.float64)
    v, u = np.nonzero(valid)
    target_u = u + uv[v, u, 0]
    target_v = v + uv[v, u, 1]
    ref = rgb_ref.data[v, u].astype(np.float64)
    sampled = np.stack(
        [bilinear(rgb_tst.data[:, :, c].astype(np.float64), target_u, target_v) for c in range(3)], axis=1
    )
    return float(np.linalg.norm(ref - sampled, axis=1).mean())


def occlusion_fraction(flow: FlowField) -> float:
    """Fraction of pixels carrying any mask flag."""
    return float(np.count_nonzero(flow.mask.plane()) / flow.mask.plane().size)


def min_depth(depth: RasterImage) -> float:
    """Smallest finite depth of a frame, ``inf`` when nothing was hit."""
    plane = depth.plane()
    valid = depth_valid(plane)
    return float(plane[valid].min()) if valid.any() else math.inf


def collision_check(depths: Iterable[RasterImage], threshold: float = 0.25) -> List[Tuple[float, bool]]:
    """Per-frame ``(min_depth, passed)``; a frame fails when its minimum depth is below ``threshold``."""
    results = []
    for depth in depths:
        nearest = min_depth(depth)
        results.append((nearest, nearest >= threshold))
    return results


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📋 Reports
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class PairCheck:
    """Checks for one consecutive frame pair."""

    ref: int
    tst: int
    photometric: float
    occlusion: float
    min_depth: float
    photometric_ok: bool
    occlusion_ok: bool
    collision_ok: bool


@dataclass
class VerifyReport:
    pairs: List[PairCheck] = field(default_factory=list)
    frame_min_depths: List[float] = field(default_factory=list)
    thresholds: VerifyThresholds = field(default_factory=VerifyThresholds)

    @property
    def max_photometric(self) -> float:
        # Pairs without comparable pixels carry NaN and are counted as failures instead
        return max((p.photometric for p in self.pairs if not math.isnan(p.photometric)), default=0.0)

    @property
    def max_occlusion(self) -> float:
        return max((p.occlusion for p in self.pairs), default=0.0)

    @property
    def min_depth(self) -> float:
        return min(self.frame_min_depths, default=math.inf)

    @property
    def photometric_failures(self) -> int:
        return sum(not p.photometric_ok for p in self.pairs)

    @property
    def occlusion_flags(self) -> int:
        return sum(not p.occlusion_ok for p in self.pairs)

    @property
    def collision_failures(self) -> int:
        return sum(d < self.thresholds.collision for d in self.frame_min_depths)

    @property
    def passed(self) -> bool:
        occlusion_ok = self.occlusion_flags == 0 or not self.thresholds.strict_occlusion
        return self.photometric_failures == 0 and self.collision_failures == 0 and occlusion_ok

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict}: {len(self.pairs)} pairs, max photometric {self.max_photometric:.3f}, "
            f"max occlusion {self.max_occlusion:.3f}, min depth {self.min_depth:.3f} m"
        )


def check_pair(
    ref: int,
    tst: int,
    rgb_ref: RasterImage,
    rgb_tst: RasterImage,
    flow: FlowField,
    depth_ref: RasterImage,
    depth_tst: RasterImage,
    thresholds: VerifyThresholds,
) -> PairCheck:
    """
    Run all three checks on one frame pair.

    A pair without a single valid flow pixel cannot be shown to be in sync;
    its photometric error is NaN and the photometric check fails.
    """
    try:
        error = warp_photometric_error(rgb_ref, rgb_tst, flow)
    except VerificationError:
        logger.warning(f"⚠️ Pair {ref}->{tst} has no valid flow pixels")
        error = math.nan
    occ = occlusion_fraction(flow)
    nearest = min(min_depth(depth_ref), min_depth(depth_tst))
    return PairCheck(
        ref,
        tst,
        error,
        occ,
        nearest,
        error < thresholds.photometric,
        occ <= thresholds.occlusion,
        nearest >= thresholds.collision,
    )


def verify_sequence(
    rgbs: Sequence[RasterImage],
    depths: Sequence[RasterImage],
    flows: Sequence[FlowField],
    thresholds: Optional[VerifyThresholds] = None,
) -> VerifyReport:
    """
    Verify a sequence given its images and the flows between consecutive frames.

    ``flows[i]`` must map frame ``i`` to frame ``i + 1``.
    """
    thresholds = thresholds or VerifyThresholds()
    if not (len(rgbs) == len(depths) == len(flows) + 1):
        raise VerificationError(
            f"Expected N images, N depths and N-1 flows, got {len(rgbs)}, {len(depths)}, {len(flows)}"
        )
    report = VerifyReport(thresholds=thresholds)
    report.frame_min_depths = [d for d, _ in collision_check(depths, thresholds.collision)]
    for i, flow in enumerate(flows):
        report.pairs.append(
            check_pair(i, i + 1, rgbs[i], rgbs[i + 1], flow, depths[i], depths[i + 1], thresholds)
        )
    logger.info(f"🔍 Verification {report.summary()}")
    return report
