#!/usr/bin/env python3
# 🌀 Occupancy Mapper Tests
"""Voxel traversal, depth integration, frontiers and exploration."""

import numpy as np
import pytest

from traj_forge.errors import MappingError, NoViewpointError
from traj_forge.geom import pose_from_body
from traj_forge.mapper import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    GridParams,
    OccupancyGrid,
    clearance_map,
    cube_map_poses,
    detect_frontiers,
    explore,
    frontier_mask,
    integrate_depth,
    safe_mask,
    segment_clear,
    select_next_view,
    trace_rays,
    voxelize_scene,
)
from traj_forge.pipeline import choose_start
from traj_forge.scenesim import render_depth


@pytest.mark.unit
class TestOccupancyGrid:
    """Grid geometry and state bookkeeping."""

    def test_from_bounds(self):
        grid = OccupancyGrid.from_bounds((-0.5, -0.5, -0.5), (8.5, 8.5, 3.5), 0.25)
        assert np.allclose(grid.origin, [-0.5, -0.5, -0.5])
        assert grid.dims == (36, 36, 16)
        assert grid.counts() == (36 * 36 * 16, 0, 0)

    def test_index_world_conversion(self):
        grid = OccupancyGrid((1.0, 2.0, 3.0), 0.5, (4, 4, 4))
        assert grid.world_to_index([1.0, 2.0, 3.0]).tolist() == [0, 0, 0]
        assert grid.world_to_index([1.49, 2.5, 3.99]).tolist() == [0, 1, 1]
        assert np.allclose(grid.index_to_world([0, 1, 2]), [1.25, 2.75, 4.25])
        assert not grid.contains_point([0.9, 2.0, 3.0])

    def test_invalid_geometry(self):
        with pytest.raises(MappingError):
            OccupancyGrid((0, 0, 0), 0.0, (2, 2, 2))
        with pytest.raises(MappingError):
            OccupancyGrid((0, 0, 0), 1.0, (2, 0, 2))
        with pytest.raises(MappingError):
            OccupancyGrid((0, 0, 0), 1.0, (2, 2, 2), np.full((2, 2, 2), 3))

    def test_apply_only_changes_unknown_cells(self):
        grid = OccupancyGrid((0, 0, 0), 1.0, (3, 1, 1))
        grid.cells[0, 0, 0] = FREE
        hits = np.ones((3, 1, 1), dtype=bool)
        changed = grid.apply(np.zeros_like(hits), hits)
        assert changed == 2
        assert grid.cells.ravel().tolist() == [FREE, OCCUPIED, OCCUPIED]

    def test_occupied_wins_within_a_frame(self):
        grid = OccupancyGrid((0, 0, 0), 1.0, (1, 1, 1))
        grid.apply(np.ones((1, 1, 1), dtype=bool), np.ones((1, 1, 1), dtype=bool))
        assert grid.cells[0, 0, 0] == OCCUPIED

    def test_state_outside_is_unknown(self, open_grid):
        assert open_grid.state_at(np.array([[-1.0, 0.0, 0.0], [5.0, 5.0, 1.5]])).tolist() == [UNKNOWN, FREE]


@pytest.mark.unit
class TestClearance:
    def test_values(self, open_grid):
        clearance = clearance_map(open_grid)
        assert clearance[1, 1, 1] == pytest.approx(0.125)
        assert clearance[20, 20, 6] == pytest.approx(1.125)
        assert clearance[0, 0, 0] == pytest.approx(-0.125)

    def test_safe_mask(self, open_grid):
        safe = safe_mask(open_grid, 0.5)
        assert safe[3, 20, 6]
        assert not safe[2, 20, 6]
        assert not safe[0, 20, 6]

    def test_unknown_counts_as_obstacle(self, open_grid):
        grid = open_grid.copy()
        grid.cells[21, 20, 6] = UNKNOWN
        assert clearance_map(grid)[20, 20, 6] == pytest.approx(0.125)

    def test_segments(self, open_grid, wall_grid):
        free = open_grid.cells == FREE
        assert segment_clear(open_grid, free, [1.0, 1.0, 1.0], [9.0, 9.0, 2.0])
        assert not segment_clear(open_grid, free, [1.0, 1.0, 1.0], [-1.0, 1.0, 1.0])
        walled = wall_grid.cells == FREE
        assert not segment_clear(wall_grid, walled, [2.5, 2.5, 1.5], [7.5, 2.5, 1.5])
        assert segment_clear(wall_grid, walled, [2.5, 9.0, 1.5], [7.5, 9.0, 1.5])


@pytest.mark.unit
class TestRayTraversal:
    """Exact voxel traversal along pixel rays."""

    def test_single_ray(self):
        grid = OccupancyGrid((0, 0, 0), 1.0, (10, 3, 3))
        free, occupied = trace_rays(
            grid, np.array([0.5, 1.5, 1.5]), np.array([[1.0, 0.0, 0.0]]), np.array([5.0]), np.array([5.0])
        )
        assert np.nonzero(free[:, 1, 1])[0].tolist() == [0, 1, 2, 3, 4, 5]
        assert np.nonzero(occupied[:, 1, 1])[0].tolist() == [5]
        assert free.sum() == 6 and occupied.sum() == 1
        grid.apply(free, occupied)
        assert grid.cells[:, 1, 1].tolist() == [FREE] * 5 + [OCCUPIED] + [UNKNOWN] * 4

    def test_ray_without_hit_marks_nothing_occupied(self):
        grid = OccupancyGrid((0, 0, 0), 1.0, (10, 3, 3))
        free, occupied = trace_rays(
            grid, np.array([0.5, 1.5, 1.5]), np.array([[1.0, 0.0, 0.0]]), np.array([3.0]), np.array([np.inf])
        )
        assert np.nonzero(free[:, 1, 1])[0].tolist() == [0, 1, 2, 3]
        assert not occupied.any()

    def test_diagonal_ray_visits_connected_voxels(self):
        grid = OccupancyGrid((0, 0, 0), 1.0, (8, 8, 1))
        direction = np.array([[3.0, 2.0, 0.0]]) / np.sqrt(13.0)
        free, _ = trace_rays(grid, np.array([0.5, 0.5, 0.5]), direction, np.array([7.0]), np.array([np.inf]))
        visited = np.argwhere(free)
        # Successive voxels of a traversal differ along exactly one axis
        ordered = visited[np.lexsort((visited[:, 1], visited[:, 0]))]
        steps = np.abs(np.diff(ordered, axis=0)).sum(axis=1)
        assert np.all(steps == 1)

    def test_hit_near_a_convex_edge_stays_in_front_of_it(self):
        # The ray meets the face y = 2 a tenth of a millimetre past the edge x = 3;
        # it would only cross x = 3 after the hit
        grid = OccupancyGrid((0, 0, 0), 1.0, (6, 6, 1))
        origin = np.array([4.5, 0.5, 0.5])
        offset = np.array([-1.4999, 1.5, 0.0])
        hit = np.linalg.norm(offset)
        _, occupied = trace_rays(grid, origin, (offset / hit)[None], np.array([hit]), np.array([hit]))
        assert np.argwhere(occupied).tolist() == [[3, 2, 0]]

    @pytest.mark.parametrize("error", [-5e-7, 0.0, 5e-7])
    def test_face_on_a_boundary_lands_behind_it(self, error):
        grid = OccupancyGrid((0, 0, 0), 1.0, (6, 6, 1))
        origin = np.array([0.5, 0.5, 0.5])
        direction = np.array([[0.6, 0.8, 0.0]])
        hit = np.array([2.5 / 0.6 + error])
        free, occupied = trace_rays(grid, origin, direction, hit, hit)
        assert np.argwhere(occupied).tolist() == [[3, 3, 0]]
        assert free[2, 3, 0] and not free[3, 3, 0]


@pytest.mark.unit
class TestIntegration:
    def test_wall_frame(self, wall_scene, cam32):
        grid = OccupancyGrid.for_scene(wall_scene, 0.25)
        pose = pose_from_body([0.0, 0.0, 0.0], 0.0)
        integrate_depth(grid, render_depth(wall_scene, pose, cam32), pose, cam32)
        states = grid.state_at(np.array([[1.0, 0.1, 0.1], [2.1, 0.1, 0.1], [3.0, 0.1, 0.1], [-1.0, 0.1, 0.1]]))
        assert states.tolist() == [FREE, OCCUPIED, UNKNOWN, UNKNOWN]

    def test_max_range_carves_without_hits(self, wall_scene, cam32):
        grid = OccupancyGrid.for_scene(wall_scene, 0.25)
        pose = pose_from_body([0.0, 0.0, 0.0], 0.0)
        integrate_depth(grid, render_depth(wall_scene, pose, cam32), pose, cam32, max_range=1.0)
        assert grid.counts()[2] == 0
        assert grid.state_at(np.array([[0.5, 0.1, 0.1], [1.5, 0.1, 0.1]])).tolist() == [FREE, UNKNOWN]

    def test_camera_outside_grid(self, wall_scene, cam32):
        grid = OccupancyGrid.for_scene(wall_scene, 0.25)
        pose = pose_from_body([10.0, 0.0, 0.0], 0.0)
        with pytest.raises(MappingError):
            integrate_depth(grid, render_depth(wall_scene, pose, cam32), pose, cam32)

    def test_cube_map_covers_all_axes(self):
        axes = np.array([p.rotation_matrix[:, 2] for p in cube_map_poses([0.0, 0.0, 0.0])])
        expected = np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float)
        for axis in expected:
            assert np.any(np.all(np.isclose(axes, axis, atol=1e-12), axis=1))


@pytest.mark.unit
class TestOracle:
    """Exact voxelization of analytic scenes."""

    def test_room(self, room_scene):
        grid = voxelize_scene(room_scene, 0.25)
        points = np.array([[4.0, 4.0, 1.5], [-0.125, 4.0, 1.5], [4.0, 4.0, -0.125], [-0.375, 4.0, 1.5]])
        assert grid.state_at(points).tolist() == [FREE, OCCUPIED, OCCUPIED, FREE]
        assert grid.counts()[0] == 0

    def test_seed_point_keeps_only_connected_space(self, room_scene):
        grid = voxelize_scene(room_scene, 0.25, seed_point=[4.0, 4.0, 1.5])
        assert grid.state_at(np.array([[-0.375, 4.0, 1.5], [4.0, 4.0, 1.5]])).tolist() == [UNKNOWN, FREE]
        assert grid.free.sum() == 32 * 32 * 12

    def test_seed_in_solid(self, room_scene):
        with pytest.raises(MappingError):
            voxelize_scene(room_scene, 0.25, seed_point=[-0.1, 4.0, 1.5])

    def test_plane_is_occupied(self, wall_scene):
        grid = voxelize_scene(wall_scene, 0.25)
        assert grid.state_at(np.array([[2.1, 0.0, 0.0], [1.5, 0.0, 0.0]])).tolist() == [OCCUPIED, FREE]


@pytest.mark.unit
class TestFrontiers:
    def test_clusters_sorted_by_size(self):
        grid = OccupancyGrid((0, 0, 0), 1.0, (10, 10, 10))
        grid.cells[2:5, 2:5, 2:5] = FREE
        grid.cells[7:9, 7:9, 7:9] = FREE
        clusters = detect_frontiers(grid)
        assert [c.size for c in clusters] == [26, 8]
        assert [c.cluster_id for c in clusters] == [0, 1]
        assert np.allclose(clusters[0].centroid, [3.5, 3.5, 3.5])
        assert not frontier_mask(grid)[3, 3, 3]

    def test_known_map_has_no_frontier(self, open_grid):
        assert detect_frontiers(open_grid) == []

    def test_select_next_view(self, open_grid):
        grid = open_grid.copy()
        grid.cells[25:39, 1:39, 1:11] = UNKNOWN
        clusters = detect_frontiers(grid)
        assert len(clusters) == 1
        current = pose_from_body([2.0, 5.0, 1.5], 0.0)
        view = select_next_view(grid, clusters, current, GridParams())
        assert np.linalg.norm(view.translation - current.translation) < 0.25
        axis = clusters[0].centroid - view.translation
        assert np.allclose(view.rotation_matrix[:, 2], axis / np.linalg.norm(axis))

    def test_no_clusters(self, open_grid):
        with pytest.raises(NoViewpointError):
            select_next_view(open_grid, [], pose_from_body([2.0, 5.0, 1.5], 0.0))


@pytest.mark.integration
class TestExplore:
    """Frontier exploration of closed scenes."""

    def test_short_run_never_contradicts_the_oracle(self, room_scene):
        start = pose_from_body([4.125, 4.125, 1.625], 0.0)
        result = explore(room_scene, start, GridParams(scan_size=48, budget=3), seed=1)
        oracle = voxelize_scene(room_scene, 0.25)
        assert result.poses[0] is start
        assert 1 <= result.iterations <= 3
        assert not np.any(result.grid.free & oracle.occupied)
        assert not np.any(result.grid.occupied & oracle.free)
        assert result.grid.state_at(start.translation[None])[0] == FREE
        assert result.grid.free.sum() > 0.5 * 32 * 32 * 12

    @pytest.mark.parametrize("scene_fixture", ["room_scene", "two_room_scene"])
    def test_full_exploration_recovers_the_reachable_free_space(self, scene_fixture, request):
        scene = request.getfixturevalue(scene_fixture)
        start = choose_start(scene, 0.25)
        result = explore(scene, start, GridParams(), seed=0)
        assert result.complete
        assert result.frontiers == 0
        assert detect_frontiers(result.grid) == []
        oracle = voxelize_scene(scene, 0.25, seed_point=start.translation)
        assert np.array_equal(result.grid.free, oracle.free)
        assert not np.any(result.grid.occupied & oracle.free)

    def test_start_inside_obstacle(self, room_scene):
        with pytest.raises(MappingError):
            explore(room_scene, pose_from_body([-0.1, 4.0, 1.5], 0.0))

    def test_start_outside_grid(self, room_scene):
        with pytest.raises(MappingError):
            explore(room_scene, pose_from_body([40.0, 4.0, 1.5], 0.0))
