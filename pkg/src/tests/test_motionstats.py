#!/usr/bin/env python3
# 🌀 Motion Statistics Tests
"""Motion diversity score and the plot-ready motion table."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from traj_forge.errors import TrajForgeError
from traj_forge.geom import Pose, compose, pose_from_body, so3_exp
from traj_forge.motionstats import (
    dataset_sigma,
    diversity_sigma,
    format_motion_csv,
    motion_matrices,
    motion_table,
    principal_motion,
    sigma_report,
)


def straight_line(axis: int, n: int = 5, step: float = 0.1):
    delta = np.zeros(3)
    delta[axis] = step
    return [Pose.from_translation(i * delta) for i in range(n)]


def random_walk(rng, n: int = 200):
    poses = [Pose.identity()]
    for _ in range(n - 1):
        step = Pose(so3_exp(rng.normal(0.0, 0.05, 3)), rng.normal(0.0, 0.1, 3))
        poses.append(compose(poses[-1], step))
    return poses


def car_like(rng, n: int = 500):
    """Forward 1 m ± 5 % with yaw steps of at most 1°."""
    position, yaw = np.zeros(3), 0.0
    poses = [pose_from_body(position, yaw)]
    for _ in range(n - 1):
        position = position + rng.uniform(0.95, 1.05) * np.array([np.cos(yaw), np.sin(yaw), 0.0])
        yaw += np.radians(rng.uniform(-1.0, 1.0))
        poses.append(pose_from_body(position, yaw))
    return poses


def isotropic(cycles: int = 4):
    """Equal steps along and about each body axis in turn."""
    poses = [Pose.identity()]
    for k in range(3 * cycles):
        axis = np.eye(3)[k % 3]
        poses.append(compose(poses[-1], Pose(so3_exp(0.05 * axis), 0.1 * axis)))
    return poses


@pytest.mark.unit
class TestDiversity:
    """σ behaviour at its extremes."""

    def test_straight_line_scores_zero(self):
        assert diversity_sigma(straight_line(2)) == pytest.approx(0.0, abs=1e-12)

    def test_constant_turn_scores_zero(self):
        poses = [pose_from_body([np.cos(a), np.sin(a), 1.0], a + np.pi / 2) for a in np.linspace(0, 2, 30)]
        assert diversity_sigma(poses) == pytest.approx(0.0, abs=1e-6)

    def test_random_motion_is_diverse(self, rng):
        sigma = diversity_sigma(random_walk(rng))
        assert 0.5 < sigma <= 1.0

    def test_world_frame_option(self, rng):
        sigma = diversity_sigma(random_walk(rng), delta_frame="world")
        assert 0.5 < sigma <= 1.0

    def test_isotropic_motion_scores_one(self):
        assert diversity_sigma(isotropic()) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("seed", range(20))
    def test_car_like_motion_scores_low(self, seed):
        assert diversity_sigma(car_like(np.random.default_rng(seed))) < 0.1

    @pytest.mark.parametrize("seed", range(3))
    def test_long_random_walk_scores_high(self, seed):
        assert diversity_sigma(random_walk(np.random.default_rng(seed), 2000)) > 0.8

    @pytest.mark.parametrize("delta_frame", ["body", "world"])
    def test_rigid_transform_invariance(self, rng, delta_frame):
        poses = random_walk(rng, 50)
        moved = Pose(so3_exp([0.4, -1.1, 0.7]), [3.0, -2.0, 5.0])
        shifted = [compose(moved, p) for p in poses]
        assert diversity_sigma(shifted, delta_frame) == pytest.approx(diversity_sigma(poses, delta_frame), abs=1e-9)

    @pytest.mark.parametrize("delta_frame", ["body", "world"])
    def test_translation_scale_invariance(self, rng, delta_frame):
        poses = random_walk(rng, 50)
        scaled = [Pose(p.rotation, 2.5 * p.translation) for p in poses]
        assert diversity_sigma(scaled, delta_frame) == pytest.approx(diversity_sigma(poses, delta_frame), abs=1e-9)

    def test_dataset_sigma_merges_sequences(self):
        # Three single-axis sequences fill translation space evenly
        sequences = [straight_line(axis) for axis in range(3)]
        assert all(diversity_sigma(seq) == pytest.approx(0.0) for seq in sequences)
        assert dataset_sigma(sequences) == pytest.approx(0.5)

    def test_too_few_poses(self):
        with pytest.raises(TrajForgeError):
            diversity_sigma([Pose.identity()])

    def test_unknown_delta_frame(self):
        with pytest.raises(TrajForgeError):
            motion_matrices(straight_line(0), delta_frame="camera")

    def test_body_deltas(self):
        yawed = Rotation.from_euler("z", 90, degrees=True).as_quat()
        poses = [Pose(yawed, [0.0, 0.0, 0.0]), Pose(yawed, [0.0, 1.0, 0.0])]
        motion = motion_matrices(poses)
        assert np.allclose(motion.T[:, 0], [1.0, 0.0, 0.0])
        assert np.allclose(motion.R, 0.0)
        world = motion_matrices(poses, delta_frame="world")
        assert np.allclose(world.T[:, 0], [0.0, 1.0, 0.0])


@pytest.mark.unit
class TestPrincipalMotion:
    def test_zero_matrix(self):
        principal = principal_motion(np.zeros((3, 4)))
        assert np.all(principal.values == 0.0)
        assert np.allclose(principal.U, np.eye(3))

    def test_values_are_sorted_and_padded(self):
        matrix = np.array([[3.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        principal = principal_motion(matrix)
        assert np.allclose(principal.values, [3.0, 1.0, 0.0])


@pytest.mark.unit
class TestMotionTable:
    def test_rows(self):
        sigma, rows = motion_table(straight_line(0, n=6, step=0.2))
        assert sigma == pytest.approx(0.0)
        assert rows.shape == (5, 7)
        assert rows[:, 0].tolist() == [0, 1, 2, 3, 4]
        assert np.allclose(np.abs(rows[:, 1]), 0.2)
        assert np.allclose(rows[:, 2:], 0.0)

    def test_csv(self, rng):
        sigma, rows = motion_table(random_walk(rng, 10))
        lines = format_motion_csv(sigma, rows).splitlines()
        assert lines[0] == f"# sigma,{sigma!r}"
        assert lines[1] == "frame,t1,t2,t3,r1,r2,r3"
        assert len(lines) == 2 + 9
        assert lines[2].startswith("0,")
        assert len(lines[-1].split(",")) == 7

    def test_sigma_report(self):
        text = sigma_report([("room_easy", 0.12345), ("b", 1.0)])
        lines = text.splitlines()
        assert lines[0].split() == ["sequence", "sigma"]
        assert lines[1].split() == ["room_easy", "0.1235"]
        assert lines[2].split() == ["b", "1.0000"]
