#!/usr/bin/env python3
# 🌀 Scene Simulator Tests
"""Ray casting, rendering, scene files and procedural scenes."""

import math

import numpy as np
import pytest

from traj_forge.errors import GeometryError, SceneFormatError
from traj_forge.geom import DEPTH_MISS, pose_from_body
from traj_forge.scenesim import (
    SCENE_KINDS,
    Box,
    Plane,
    Scene,
    Sphere,
    Texture,
    Triangle,
    format_scene,
    generate_scene,
    parse_scene,
    ray_cast,
    render_frame,
)

FLAT = Texture()


@pytest.mark.unit
class TestPrimitives:
    """Analytic intersections."""

    def test_sphere_hit_distance_and_normal(self, sphere_scene):
        hit = ray_cast(sphere_scene, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
        assert hit.object_id == 1
        assert hit.distance == pytest.approx(4.0)
        assert np.allclose(hit.normal, [-1.0, 0.0, 0.0])

    def test_ray_past_sphere_hits_wall(self, sphere_scene):
        hit = ray_cast(sphere_scene, [0.0, 0.0, 3.0], [1.0, 0.0, 0.0])
        assert hit.object_id == 2
        assert hit.distance == pytest.approx(9.0)

    def test_ray_from_inside_sphere_hits_far_side(self):
        scene = Scene((Sphere(1, FLAT, (0.0, 0.0, 0.0), 2.0),), (-5, -5, -5), (5, 5, 5))
        hit = ray_cast(scene, [0.0, 0.0, 0.0], [0.0, 1.0, 0.0])
        assert hit.distance == pytest.approx(2.0)

    def test_box_faces(self):
        scene = Scene((Box(7, FLAT, (3.0, 0.0, 0.0), (1.0, 1.0, 1.0)),), (-5, -5, -5), (5, 5, 5))
        hit = ray_cast(scene, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
        assert hit.distance == pytest.approx(2.0)
        assert np.allclose(hit.normal, [-1.0, 0.0, 0.0])
        hit = ray_cast(scene, [3.0, 0.0, 5.0], [0.0, 0.0, -1.0])
        assert hit.distance == pytest.approx(4.0)
        assert np.allclose(hit.normal, [0.0, 0.0, 1.0])

    def test_triangle(self):
        tri = Triangle(3, FLAT, (2.0, -1.0, -1.0), (2.0, 1.0, -1.0), (2.0, 0.0, 1.0))
        scene = Scene((tri,), (-5, -5, -5), (5, 5, 5))
        assert ray_cast(scene, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]).distance == pytest.approx(2.0)
        assert ray_cast(scene, [0.0, 0.0, 0.0], [1.0, 0.0, 1.0]) is None

    def test_hits_outside_bounds_are_ignored(self):
        scene = Scene((Plane(1, FLAT, (0.0, 0.0, 0.0), (0.0, 0.0, 1.0)),), (-1, -1, -1), (1, 1, 1))
        assert ray_cast(scene, [0.0, 0.0, 0.5], [0.0, 0.0, -1.0]).distance == pytest.approx(0.5)
        assert ray_cast(scene, [0.0, 0.0, 0.5], [1.0, 0.0, -0.1]) is None

    def test_miss(self, sphere_scene):
        assert ray_cast(sphere_scene, [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]) is None

    def test_zero_direction(self, sphere_scene):
        with pytest.raises(GeometryError):
            ray_cast(sphere_scene, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])

    def test_inside_solid(self, box_scene):
        inside = box_scene.inside_solid(np.array([[2.5, 2.5, 0.5], [4.0, 4.0, 1.5], [-0.1, 4.0, 1.5]]))
        assert inside.tolist() == [True, False, True]


@pytest.mark.unit
class TestSceneValidation:
    def test_duplicate_ids(self):
        with pytest.raises(GeometryError):
            Scene((Sphere(1, FLAT, (0, 0, 0), 1.0), Sphere(1, FLAT, (2, 0, 0), 1.0)), (-5, -5, -5), (5, 5, 5))

    def test_empty_bounds(self):
        with pytest.raises(GeometryError):
            Scene((), (0, 0, 0), (0, 1, 1))

    def test_primitive_outside_bounds(self):
        with pytest.raises(GeometryError):
            Scene((Sphere(1, FLAT, (20, 0, 0), 1.0),), (-5, -5, -5), (5, 5, 5))

    def test_bad_texture(self):
        with pytest.raises(GeometryError):
            Texture(kind="marble")


@pytest.mark.unit
class TestRendering:
    """Depth, RGB and segmentation from one ray batch."""

    def test_depth_of_fronto_parallel_wall(self, wall_scene, cam32):
        frame = render_frame(wall_scene, pose_from_body([0.0, 0.0, 0.0], 0.0), cam32)
        assert frame.depth.dtype == "f32"
        assert np.allclose(frame.depth.plane(), 2.0, atol=1e-6)
        assert np.all(frame.seg.plane() == 1)

    def test_rgb_is_deterministic_and_textured(self, wall_scene, cam32):
        pose = pose_from_body([0.0, 0.0, 0.0], 0.0)
        a = render_frame(wall_scene, pose, cam32)
        b = render_frame(wall_scene, pose, cam32)
        assert a.rgb.equals(b.rgb)
        assert a.rgb.channels == 3
        assert a.rgb.data.std() > 0

    def test_misses(self, wall_scene, cam32):
        frame = render_frame(wall_scene, pose_from_body([0.0, 0.0, 0.0], math.pi), cam32)
        assert np.all(frame.depth.plane() == np.float32(DEPTH_MISS))
        assert np.all(frame.seg.plane() == 0)
        assert np.all(frame.rgb.data == 0)

    def test_sphere_depth_at_centre_pixel(self, sphere_scene, cam640):
        frame = render_frame(sphere_scene, pose_from_body([0.0, 0.0, 0.0], 0.0), cam640, with_rgb=False)
        assert frame.depth.plane()[320, 320] == pytest.approx(4.0)
        assert frame.seg.plane()[320, 320] == 1
        assert frame.seg.plane()[0, 0] == 2


@pytest.mark.unit
class TestSceneFiles:
    """Scene description grammar."""

    def test_roundtrip_preserves_everything(self, box_scene):
        text = format_scene(box_scene)
        parsed = parse_scene(text)
        assert format_scene(parsed) == text
        assert parsed.object_ids == box_scene.object_ids

    def test_defaults_and_comments(self):
        text = "# a comment\nbounds = -5 -5 -5 5 5 5\n\n[sphere]\nid = 4  # trailing\ncenter = 1 2 3\nradius = 0.5\n"
        scene = parse_scene(text)
        sphere = scene.primitive(4)
        assert sphere.radius == 0.5
        assert sphere.texture.kind == "flat"

    @pytest.mark.parametrize(
        "text,line",
        [
            ("[sphere]\nid = 1\n", 1),
            ("bounds = 0 0 0 1 1 1\n[cone]\n", 2),
            ("bounds = 0 0 0 1 1 1\n[sphere]\nid = 1\ncenter = 0.5 0.5\nradius = 0.1\n", 4),
            ("bounds = 0 0 0 1 1 1\n[sphere]\nid = 1\ncenter = 0.5 0.5 0.5\nradius = x\n", 5),
            ("bounds = 0 0 0 1 1 1\n[sphere]\nid = 1\ncolour = 1 1 1\n", 4),
            ("bounds = 0 0 0 1 1 1\n[sphere]\nid = 1\nid = 2\n", 4),
            ("bounds = 0 0 0 1 1 1\n[sphere]\ncenter = 0.5 0.5 0.5\nradius = 0.1\n", 2),
            ("bounds = 0 0 0 1 1\n", 1),
            ("bounds = 0 0 0 1 1 1\njunk\n", 2),
        ],
    )
    def test_errors_name_the_line(self, text, line):
        with pytest.raises(SceneFormatError) as excinfo:
            parse_scene(text)
        assert excinfo.value.line == line
        assert str(excinfo.value).startswith(f"line {line}:")


@pytest.mark.unit
class TestGeneration:
    @pytest.mark.parametrize("kind", SCENE_KINDS)
    def test_deterministic(self, kind):
        assert format_scene(generate_scene(5, kind)) == format_scene(generate_scene(5, kind))

    def test_seeds_differ(self):
        assert format_scene(generate_scene(1, "room")) != format_scene(generate_scene(2, "room"))

    def test_two_rooms_door_is_open(self, two_room_scene):
        # Straight through the door from the centre of room A to room B
        hit = ray_cast(two_room_scene, [4.0, 4.0, 1.0], [1.0, 0.0, 0.0])
        assert hit.distance == pytest.approx(16.25 - 4.0)

    def test_unknown_kind(self):
        with pytest.raises(GeometryError):
            generate_scene(0, "maze")
