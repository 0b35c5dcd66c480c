"""Shared fixtures: parameter models, precomputed bundles and small worlds."""

from __future__ import annotations

import pytest

from explorer.models.bundle import PeacockBundle
from explorer.models.world import AABB, World
from explorer.schemas.bundle import BundleParams
from explorer.schemas.mission import MissionConfig, MissionMode
from explorer.schemas.run import RunConfig
from explorer.schemas.sensor import CameraModel
from explorer.schemas.voxmap import MapParams
from explorer.services.peacock import precompute_bundle
from explorer.services.sensor_world import load_world
from explorer.services.voxmap import OccupancyOctree

# A closed one-voxel-thick room around the hover point (2.5, 2.5, 2.0).
SHELL_WORLD = """\
# sealed room around the default start
bounds 0 0 0 10 10 4
box 1.0 1.0 0 1.5 4.0 3.5
box 3.5 1.0 0 4.0 4.0 3.5
box 1.5 1.0 0 3.5 1.5 3.5
box 1.5 3.5 0 3.5 4.0 3.5
box 1.5 1.5 3.0 3.5 3.5 3.5
"""

SHELL_RUN_CONFIG = """\
mission.mode=kinematic
mission.initial_yaw_deg=0
camera.h_fov_deg=170
camera.v_fov_deg=170
"""


@pytest.fixture(scope="session")
def default_bundle() -> PeacockBundle:
    return precompute_bundle(BundleParams())


@pytest.fixture(scope="session")
def small_bundle() -> PeacockBundle:
    return precompute_bundle(BundleParams(rows=3, cols=5, branches=3))


@pytest.fixture
def map_params() -> MapParams:
    return MapParams()


@pytest.fixture
def octree(map_params: MapParams) -> OccupancyOctree:
    """Unbounded map centred on the origin."""
    return OccupancyOctree(map_params)


@pytest.fixture
def wall_world() -> World:
    """Large room with one wall whose face is the plane x = 3."""
    return World(
        bounds=AABB(minimum=(-50.0, -50.0, -50.0), maximum=(50.0, 50.0, 50.0)),
        boxes=(AABB(minimum=(3.0, -1.0, 0.0), maximum=(3.5, 1.0, 2.0)),),
    )


@pytest.fixture
def shell_world_text() -> str:
    return SHELL_WORLD


@pytest.fixture
def shell_world() -> World:
    return load_world(SHELL_WORLD)


@pytest.fixture
def shell_run_config() -> RunConfig:
    """Kinematic run with a camera wide enough to map the whole room in one scan."""
    return RunConfig(
        mission=MissionConfig(mode=MissionMode.KINEMATIC, initial_yaw_deg=0.0),
        camera=CameraModel(h_fov_deg=170.0, v_fov_deg=170.0),
    )


@pytest.fixture
def shell_config_text() -> str:
    return SHELL_RUN_CONFIG
