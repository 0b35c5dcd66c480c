from pydantic import BaseModel, ConfigDict, Field

from .bundle import BundleParams
from .mission import MissionConfig
from .planner import PlannerConfig
from .sensor import CameraModel
from .vehicle import VehicleParams
from .voxmap import MapParams


class RunConfig(BaseModel):
    """Every tunable of a run, one sub-model per flat-config section."""

    model_config = ConfigDict(extra="forbid")

    mission: MissionConfig = Field(default_factory=MissionConfig)
    bundle: BundleParams = Field(default_factory=BundleParams)
    map: MapParams = Field(default_factory=MapParams)
    camera: CameraModel = Field(default_factory=CameraModel)
    vehicle: VehicleParams = Field(default_factory=VehicleParams)
    planner: PlannerConfig = Field(default_factory=PlannerConfig)
