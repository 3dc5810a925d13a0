#!/usr/bin/env python3
# 🌀 Verification Tests
"""Photometric, occlusion and collision checks over frame pairs."""

import math

import numpy as np
import pytest

from traj_forge.errors import VerificationError
from traj_forge.geom import DEPTH_MISS, Pose, RasterImage, compose, pose_from_body
from traj_forge.labelgen import FLAG_OCCLUDED, FLAG_OUT_OF_FOV, FlowField, compute_flow
from traj_forge.scenesim import render_frame
from traj_forge.verify import (
    VerifyThresholds,
    check_pair,
    collision_check,
    min_depth,
    occlusion_fraction,
    verify_sequence,
    warp_photometric_error,
)


def make_flow(height: int, width: int, du: float = 0.0, dv: float = 0.0, mask=None) -> FlowField:
    flow = np.zeros((height, width, 2), dtype=np.float32)
    flow[..., 0], flow[..., 1] = du, dv
    mask = np.zeros((height, width), dtype=np.uint8) if mask is None else mask
    return FlowField(RasterImage(flow), RasterImage(mask))


def random_rgb(rng, height=12, width=16) -> RasterImage:
    return RasterImage(rng.integers(0, 256, (height, width, 3), dtype=np.uint8))


def depth_of(value: float, shape=(12, 16)) -> RasterImage:
    return RasterImage(np.full(shape, value, dtype=np.float32))


@pytest.mark.unit
class TestPhotometric:
    def test_identical_images(self, rng):
        rgb = random_rgb(rng)
        assert warp_photometric_error(rgb, rgb, make_flow(12, 16)) == 0.0

    def test_integer_shift_is_undone_by_flow(self, rng):
        ref = random_rgb(rng)
        # Test image content moves two pixels left
        tst = RasterImage(np.roll(ref.data, -2, axis=1))
        mask = np.zeros((12, 16), dtype=np.uint8)
        mask[:, :2] = FLAG_OUT_OF_FOV
        assert warp_photometric_error(ref, tst, make_flow(12, 16, du=-2.0, mask=mask)) == pytest.approx(0.0)
        assert warp_photometric_error(ref, tst, make_flow(12, 16, mask=mask)) > 10.0

    def test_masked_pixels_are_ignored(self, rng):
        ref = random_rgb(rng)
        data = ref.data.copy()
        data[0, 0] = 255 - data[0, 0]
        mask = np.zeros((12, 16), dtype=np.uint8)
        mask[0, 0] = FLAG_OCCLUDED
        assert warp_photometric_error(ref, RasterImage(data), make_flow(12, 16, mask=mask)) == 0.0

    def test_size_mismatch(self, rng):
        with pytest.raises(VerificationError):
            warp_photometric_error(random_rgb(rng), random_rgb(rng, 8, 8), make_flow(12, 16))

    def test_nothing_valid(self, rng):
        rgb = random_rgb(rng)
        with pytest.raises(VerificationError):
            warp_photometric_error(rgb, rgb, make_flow(12, 16, mask=np.full((12, 16), 2, dtype=np.uint8)))

    def test_rendered_pair(self, box_scene, cam160):
        pose_ref = pose_from_body([4.0, 4.0, 1.5], 0.2)
        pose_tst = compose(pose_ref, Pose.from_translation([0.3, 0.0, 0.0]))
        ref = render_frame(box_scene, pose_ref, cam160)
        tst = render_frame(box_scene, pose_tst, cam160)
        flow = compute_flow(ref.depth, pose_ref, pose_tst, tst.depth, cam160)
        still = FlowField(RasterImage(np.zeros_like(flow.flow.data)), flow.mask)
        assert warp_photometric_error(ref.rgb, tst.rgb, flow) < warp_photometric_error(ref.rgb, tst.rgb, still)


@pytest.mark.unit
class TestOcclusionAndDepth:
    def test_occlusion_fraction_counts_any_flag(self):
        mask = np.zeros((4, 5), dtype=np.uint8)
        mask[0, :] = FLAG_OCCLUDED
        mask[1, 0] = FLAG_OUT_OF_FOV
        assert occlusion_fraction(make_flow(4, 5, mask=mask)) == pytest.approx(6 / 20)

    def test_min_depth_skips_misses(self):
        data = np.full((3, 3), DEPTH_MISS, dtype=np.float32)
        data[1, 2] = 0.7
        data[2, 2] = 3.0
        assert min_depth(RasterImage(data)) == pytest.approx(0.7)

    def test_min_depth_of_empty_frame(self):
        assert min_depth(RasterImage(np.full((2, 2), DEPTH_MISS, dtype=np.float32))) == math.inf

    def test_collision_threshold(self):
        results = collision_check([depth_of(1.0), depth_of(0.2), depth_of(0.25)], threshold=0.25)
        assert [ok for _, ok in results] == [True, False, True]
        assert results[1][0] == pytest.approx(0.2)


@pytest.mark.unit
class TestReports:
    """Pair checks and sequence verdicts."""

    def test_pair_without_valid_pixels_fails_photometric(self, rng):
        rgb = random_rgb(rng)
        flow = make_flow(12, 16, mask=np.full((12, 16), FLAG_OUT_OF_FOV, dtype=np.uint8))
        check = check_pair(0, 1, rgb, rgb, flow, depth_of(2.0), depth_of(2.0), VerifyThresholds())
        assert math.isnan(check.photometric)
        assert not check.photometric_ok
        assert check.occlusion == 1.0
        assert not check.occlusion_ok

    def test_sequence_passes(self, rng):
        rgb = random_rgb(rng)
        report = verify_sequence([rgb] * 3, [depth_of(2.0)] * 3, [make_flow(12, 16)] * 2)
        assert report.passed
        assert len(report.pairs) == 2
        assert report.frame_min_depths == [2.0, 2.0, 2.0]
        assert report.summary().startswith("PASS: 2 pairs")

    def test_occlusion_only_fails_in_strict_mode(self, rng):
        rgb = random_rgb(rng)
        mask = np.zeros((12, 16), dtype=np.uint8)
        mask[:8] = FLAG_OCCLUDED
        flows = [make_flow(12, 16, mask=mask)]
        lenient = verify_sequence([rgb] * 2, [depth_of(2.0)] * 2, flows)
        strict = verify_sequence([rgb] * 2, [depth_of(2.0)] * 2, flows, VerifyThresholds(strict_occlusion=True))
        assert lenient.occlusion_flags == 1 and lenient.passed
        assert not strict.passed

    def test_collision_fails_the_sequence(self, rng):
        rgb = random_rgb(rng)
        report = verify_sequence([rgb] * 2, [depth_of(2.0), depth_of(0.1)], [make_flow(12, 16)])
        assert report.collision_failures == 1
        assert report.min_depth == pytest.approx(0.1)
        assert not report.passed
        assert report.summary().startswith("FAIL")

    def test_photometric_failure(self, rng):
        a, b = random_rgb(rng), random_rgb(rng)
        report = verify_sequence([a, b], [depth_of(2.0)] * 2, [make_flow(12, 16)])
        assert report.photometric_failures == 1
        assert not report.passed

    def test_count_mismatch(self, rng):
        rgb = random_rgb(rng)
        with pytest.raises(VerificationError):
            verify_sequence([rgb] * 3, [depth_of(2.0)] * 3, [make_flow(12, 16)] * 3)

    def test_pair_without_valid_pixels_fails_the_sequence(self, rng):
        rgb = random_rgb(rng)
        blind = make_flow(12, 16, mask=np.full((12, 16), FLAG_OUT_OF_FOV, dtype=np.uint8))
        report = verify_sequence([rgb] * 3, [depth_of(2.0)] * 3, [make_flow(12, 16), blind])
        assert report.photometric_failures == 1
        assert not report.passed
        assert report.max_photometric == 0.0


@pytest.mark.integration
class TestRenderedSequence:
    """Photometric error of rendered frames, in sync and with lagging images."""

    @staticmethod
    def poses(count: int):
        return [pose_from_body([3.0 + 0.15 * i, 4.0, 1.5], 0.2 + math.radians(3.0) * i) for i in range(count)]

    def test_lagging_images_stand_out(self, room_scene, cam160):
        poses = self.poses(7)
        frames = [render_frame(room_scene, pose, cam160) for pose in poses]
        flows = [
            compute_flow(frames[i].depth, poses[i], poses[i + 1], frames[i + 1].depth, cam160) for i in range(5)
        ]

        synced = verify_sequence([f.rgb for f in frames[:6]], [f.depth for f in frames[:6]], flows)
        assert len(synced.pairs) == 5
        assert all(p.photometric < 5.0 for p in synced.pairs)
        assert synced.photometric_failures == 0

        # Each test image arrives one frame late
        lagging = [warp_photometric_error(frames[i].rgb, frames[i + 2].rgb, flows[i]) for i in range(5)]
        assert min(lagging) > 3.0 * synced.max_photometric
