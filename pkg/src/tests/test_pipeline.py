#!/usr/bin/env python3
# 🌀 Sequence Pipeline Tests
"""Configuration layering, stage helpers and small end-to-end runs."""

import numpy as np
import pytest

from traj_forge.errors import ConfigError, MappingError, StageError
from traj_forge.file_formats import read_lidar, read_poses, read_raster, read_report
from traj_forge.global_info import frame_file, sequence_file
from traj_forge.pipeline import (
    PipelineConfig,
    choose_start,
    config_from_flat,
    env_overrides,
    load_config,
    run_pipeline,
    stage,
)
from traj_forge.sequence_manifest import SequenceManifest

SMALL = {
    "seed": 3,
    "frames": 5,
    "difficulty": "easy",
    "scene_kind": "empty_room",
    "camera.width": 64,
    "camera.height": 64,
    "camera.fx": 32.0,
    "camera.fy": 32.0,
    "camera.cx": 31.5,
    "camera.cy": 31.5,
    "grid.explore": False,
    "planner.nodes": 4,
    "planner.max_iters": 300,
    "lidar.n_lines": 2,
    "lidar.fov_min": -10.0,
    "lidar.fov_max": 10.0,
    "lidar.points_per_line": 16,
}


@pytest.mark.unit
class TestConfig:
    """Defaults, file, environment and explicit overrides."""

    def test_defaults(self):
        assert load_config(env={}) == PipelineConfig()

    def test_file_accepts_nested_and_dotted_keys(self, temp_dir):
        path = temp_dir / "sequence.yaml"
        path.write_text("seed: 11\ncamera:\n  width: 64\nplanner.nodes: 6\nverify.strict_occlusion: yes\n")
        config = load_config(path, env={})
        assert config.seed == 11
        assert config.camera.width == 64
        assert config.planner.nodes == 6
        assert config.verify.strict_occlusion is True

    def test_precedence(self, temp_dir):
        path = temp_dir / "sequence.yaml"
        path.write_text("seed: 11\nframes: 20\ncamera.width: 64\n")
        env = {"TRAJ_FORGE_SEED": "12", "TRAJ_FORGE_CAMERA_WIDTH": "96", "UNRELATED": "x"}
        config = load_config(path, overrides={"seed": 13}, env=env)
        assert config.seed == 13
        assert config.camera.width == 96
        assert config.frames == 20

    def test_env_overrides_only_known_keys(self):
        found = env_overrides({"TRAJ_FORGE_LIDAR_ENABLED": "off", "TRAJ_FORGE_NOPE": "1"})
        assert found == {"lidar.enabled": "off"}
        assert config_from_flat(found).lidar.enabled is False

    def test_yaml_round_trip(self, temp_dir):
        config = config_from_flat(SMALL)
        path = temp_dir / "config.yaml"
        path.write_text(config.to_yaml())
        assert load_config(path, env={}) == config

    @pytest.mark.parametrize(
        "values",
        [
            {"camera.depth": 3},
            {"verify.strict_occlusion": "maybe"},
            {"frames": "many"},
            {"frames": 1},
            {"difficulty": "insane"},
            {"planner.nodes": 2.5},
            {"workers": 0},
        ],
    )
    def test_bad_values(self, values):
        with pytest.raises(ConfigError):
            config_from_flat(values)

    def test_unreadable_files(self, temp_dir):
        with pytest.raises(ConfigError):
            load_config(temp_dir / "missing.yaml", env={})
        listing = temp_dir / "list.yaml"
        listing.write_text("- seed\n- frames\n")
        with pytest.raises(ConfigError):
            load_config(listing, env={})


@pytest.mark.unit
class TestStages:
    def test_stage_tags_errors(self):
        with pytest.raises(StageError) as excinfo:
            with stage("render", 4):
                raise MappingError("boom")
        assert excinfo.value.stage == "render"
        assert excinfo.value.frame == 4
        assert "boom" in str(excinfo.value)

    def test_stage_leaves_other_errors_alone(self):
        with pytest.raises(KeyError):
            with stage("plan"):
                raise KeyError("x")

    def test_start_is_central_and_free(self, room_scene):
        pose = choose_start(room_scene, 0.25)
        assert np.all(np.abs(pose.translation - [4.0, 4.0, 1.5]) <= 0.5)
        assert not room_scene.inside_solid(pose.translation[None])[0]
        assert np.array_equal(choose_start(room_scene, 0.25).to_row(), pose.to_row())


@pytest.mark.integration
class TestRunPipeline:
    """Small sequences through every stage."""

    def test_sequence_directory(self, temp_dir):
        config = config_from_flat(SMALL)
        result = run_pipeline(config, temp_dir / "seq", progress=False)
        root = result.root
        assert len(result.poses) == 5
        assert 0.0 <= result.sigma <= 1.0

        manifest = SequenceManifest.load(root)
        assert manifest.missing() == []
        counts = {s: len(manifest.by_stream(s)) for s in manifest.streams()}
        for name in ("image_left", "depth_left", "seg_left", "image_right", "depth_right", "disparity", "lidar"):
            assert counts[name] == 5
        assert counts["flow"] == counts["flow_mask"] == 4
        assert manifest.metadata["verdict"] == ("PASS" if result.passed else "FAIL")

        poses = read_poses(sequence_file(root, "pose_left"))
        assert all(a.allclose(b, tol=1e-12) for a, b in zip(poses, result.poses))
        assert len(read_poses(sequence_file(root, "pose_right"))) == 5
        assert read_raster(frame_file(root, "image_left", 0), "u8").channels == 3
        seg = read_raster(frame_file(root, "seg_left", 4), "u16")
        assert (seg.height, seg.width) == (64, 64)
        assert read_raster(frame_file(root, "flow", 3, "_flow"), "f32").channels == 2
        assert read_lidar(frame_file(root, "lidar", 2)).shape[1] == 3

        report = read_report(sequence_file(root, "verify_report"))
        assert len(report.pairs) == 4
        assert len(report.frame_min_depths) == 5
        assert load_config(sequence_file(root, "config"), env={}) == config
        assert sequence_file(root, "motion_stats").read_text().splitlines()[1] == "frame,t1,t2,t3,r1,r2,r3"

    def test_same_config_same_bytes(self, temp_dir):
        config = config_from_flat(SMALL)
        a = run_pipeline(config, temp_dir / "a", progress=False).root
        b = run_pipeline(config_from_flat({**SMALL, "workers": 2}), temp_dir / "b", progress=False).root
        files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
        assert files_a == files_b
        # The stored config records the worker count, everything else must match
        for rel in files_a:
            if rel.name != "config.yaml":
                assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel

    def test_no_lidar(self, temp_dir):
        result = run_pipeline(config_from_flat({**SMALL, "lidar.enabled": False}), temp_dir / "seq", progress=False)
        assert "lidar" not in result.manifest.streams()
        assert not (result.root / "lidar").exists()
