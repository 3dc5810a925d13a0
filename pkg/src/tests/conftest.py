#!/usr/bin/env python3
# 🌀 Pytest Configuration for Traj Forge Tests
"""
Shared fixtures: temporary directories, the standard cameras, analytic
scenes and small occupancy grids.
"""

import sys
import tempfile
from pathlib import Path
from typing import Generator

import numpy as np
import pytest

# Make the package importable from a source checkout
SRC_DIR = Path(__file__).parent.parent
sys.path.insert(0, str(SRC_DIR))

from traj_forge.geom import CameraModel  # noqa: E402
from traj_forge.mapper import FREE, OCCUPIED, OccupancyGrid  # noqa: E402
from traj_forge.scenesim import Box, Plane, Scene, Sphere, Texture, closed_room, two_rooms  # noqa: E402


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Fixture that provides a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 📷 Cameras
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@pytest.fixture
def cam640() -> CameraModel:
    """640×640 camera with a 90° field of view, centre at 320."""
    return CameraModel(320.0, 320.0, 320.0, 320.0, 640, 640)


@pytest.fixture
def cam160() -> CameraModel:
    """160×160 camera with a 90° field of view."""
    return CameraModel(80.0, 80.0, 79.5, 79.5, 160, 160)


@pytest.fixture
def cam32() -> CameraModel:
    return CameraModel(16.0, 16.0, 15.5, 15.5, 32, 32)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🏛️ Scenes
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@pytest.fixture
def wall_scene() -> Scene:
    """A single textured plane at world x = 2, facing the origin."""
    texture = Texture("noise", (0.8, 0.2, 0.2), (0.2, 0.2, 0.8), 0.3, 1)
    wall = Plane(1, texture, (2.0, 0.0, 0.0), (-1.0, 0.0, 0.0))
    return Scene((wall,), (-4.0, -4.0, -4.0), (4.0, 4.0, 4.0))


@pytest.fixture
def sphere_scene() -> Scene:
    """Unit sphere at world (5, 0, 0) in front of a back wall at x = 9."""
    sphere = Sphere(1, Texture("noise", (0.9, 0.9, 0.9), (0.1, 0.1, 0.1), 0.3, 7), (5.0, 0.0, 0.0), 1.0)
    wall = Plane(2, Texture("checker", (0.7, 0.7, 0.2), (0.1, 0.3, 0.6), 0.5, 2), (9.0, 0.0, 0.0), (-1.0, 0.0, 0.0))
    return Scene((sphere, wall), (-10.0, -10.0, -10.0), (10.0, 10.0, 10.0))


@pytest.fixture
def box_scene() -> Scene:
    """Closed room with a box and a sphere inside; a mix of every surface."""
    room = closed_room(seed=3)
    extra = (
        Box.from_corners(100, Texture("checker_noise", (0.6, 0.5, 0.3), (0.2, 0.3, 0.4), 0.4, 5), (2.0, 2.0, 0.0), (3.0, 3.5, 1.25)),
        Sphere(101, Texture("noise", (0.5, 0.8, 0.5), (0.1, 0.2, 0.1), 0.25, 9), (5.5, 5.0, 1.5), 0.6),
    )
    return Scene(room.primitives + extra, room.bounds_lo, room.bounds_hi)


@pytest.fixture
def room_scene() -> Scene:
    """Closed, empty 8×8×3 m room."""
    return closed_room(seed=0)


@pytest.fixture
def two_room_scene() -> Scene:
    return two_rooms(seed=0)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 🗺️ Grids
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@pytest.fixture
def open_grid() -> OccupancyGrid:
    """10×10×3 m free box at 0.25 m, walled by one voxel of occupancy."""
    grid = OccupancyGrid((0.0, 0.0, 0.0), 0.25, (40, 40, 12))
    grid.cells[:] = OCCUPIED
    grid.cells[1:-1, 1:-1, 1:-1] = FREE
    return grid


@pytest.fixture
def wall_grid(open_grid) -> OccupancyGrid:
    """The open grid split by a full-height wall at x ≈ 5 m, open for y > 7.5 m."""
    grid = open_grid.copy()
    grid.cells[19:21, 1:30, 1:-1] = OCCUPIED
    return grid


# Import markers to make them available
pytest.mark.unit = pytest.mark.unit
pytest.mark.integration = pytest.mark.integration
pytest.mark.e2e = pytest.mark.e2e
