from dataclasses import dataclass
from pydantic import Field, field_validator, model_validator

from .base import StrictModel
from .geometry import Vec3, OrientedBox, wrap_angle


@dataclass(frozen=True, slots=True)
class VehicleState:
    """Pose and shape of one vehicle at one instant; the moving actor and potential blocker."""

    id:str
    position:Vec3                           # Ground contact point (box bottom center), meters
    heading:float                           # radians, [-pi, pi)
    speed:float                             # m/s
    dims:tuple[float, float, float]         # (length, width, height) meters
    connected:bool

    def __post_init__(self):
        if len(self.dims) != 3 or min(self.dims) <= 0:
            raise ValueError(f'Vehicle "{self.id}" dims must be three positive values, got {self.dims}.')
        if self.speed < 0:
            raise ValueError(f'Vehicle "{self.id}" speed must be >= 0, got {self.speed}.')
        object.__setattr__(self, 'heading', wrap_angle(float(self.heading)))


@dataclass(frozen=True, slots=True)
class RsuNode:

    position:Vec3
    id:str = 'rsu'


@dataclass(frozen=True, slots=True)
class WorldSnapshot:
    """The cyber-world state at one timestep."""

    t:int
    vehicles:tuple[VehicleState, ...]
    rsu:RsuNode
    buildings:tuple[OrientedBox, ...]

    def vehicle(self, vehicle_id:str) -> VehicleState|None:
        """Returns the state of the given vehicle, or None if it is not present."""
        for v in self.vehicles:
            if v.id == vehicle_id: return v
        return None

    def connected_vehicles(self) -> list[VehicleState]:
        return [v for v in self.vehicles if v.connected]


# ---- JSON documents (pydantic) ---- #

class Point3(StrictModel):

    x:float
    y:float
    z:float = 0.0

    def to_vec(self) -> Vec3:
        return Vec3(self.x, self.y, self.z)


class BoxSpec(StrictModel):

    center:Point3
    half_extents:Point3
    yaw:float = 0.0

    def to_box(self) -> OrientedBox:
        return OrientedBox(self.center.to_vec(), self.half_extents.to_vec(), self.yaw)


class Waypoint(StrictModel):

    t:float     # timestep units (fractional allowed)
    x:float     # meters
    y:float     # meters


class VehicleScript(StrictModel):

    id:str
    waypoints:list[Waypoint] = Field(min_length=1)
    dims:tuple[float, float, float]
    connected:bool = True
    kind:str = 'car'

    @field_validator('dims')
    @classmethod
    def _positive_dims(cls, dims):
        if min(dims) <= 0: raise ValueError(f'dims must all be > 0, got {dims}')
        return dims

    @field_validator('waypoints')
    @classmethod
    def _increasing_timestamps(cls, waypoints):
        for prev, cur in zip(waypoints, waypoints[1:]):
            if cur.t <= prev.t: raise ValueError(f'waypoint timestamps must be strictly increasing ({prev.t} -> {cur.t})')
        return waypoints

    @property
    def t_start(self) -> float:
        return self.waypoints[0].t

    @property
    def t_end(self) -> float:
        return self.waypoints[-1].t


class Scenario(StrictModel):

    rsu:Point3
    buildings:list[BoxSpec] = []
    vehicles:list[VehicleScript] = []
    duration:int = Field(ge=1)          # timesteps
    timestep_ms:float = Field(gt=0)     # milliseconds

    @model_validator(mode='after')
    def _unique_ids(self):
        ids:list[str] = [v.id for v in self.vehicles]
        if len(ids) != len(set(ids)): raise ValueError('vehicle ids must be unique')
        if 'rsu' in ids: raise ValueError('"rsu" is reserved for the roadside unit')
        return self

    @property
    def timestep_s(self) -> float:
        return self.timestep_ms / 1000.0

    def rsu_node(self) -> RsuNode:
        return RsuNode(self.rsu.to_vec())

    def building_boxes(self) -> tuple[OrientedBox, ...]:
        return tuple(b.to_box() for b in self.buildings)

    def counts(self) -> tuple[int, int]:
        """Returns (connected, unconnected) vehicle counts."""
        connected:int = sum(1 for v in self.vehicles if v.connected)
        return connected, len(self.vehicles) - connected


class ScenarioConfig(StrictModel):

    n_vehicles:int = Field(default=30, ge=1)
    connected_fraction:float = Field(default=0.5, ge=0.0, le=1.0)
    truck_fraction:float = Field(default=0.2, ge=0.0, le=1.0)
    duration:int = Field(default=600, ge=1)                 # timesteps
    timestep_ms:float = Field(default=100.0, gt=0)
    arm_length:float = Field(default=150.0, gt=0)           # meters
    lanes_per_direction:int = Field(default=2, ge=1)
    lane_width:float = Field(default=3.5, gt=0)             # meters
    building_setback:float = Field(default=10.0, ge=0)      # meters from road edge
    building_size:float = Field(default=40.0, gt=0)         # footprint side, meters
    building_height:float = Field(default=20.0, gt=0)       # meters
    rsu_height:float = Field(default=5.0, gt=0)             # meters
    speed_min:float = Field(default=8.0, gt=0)              # m/s
    speed_max:float = Field(default=14.0, gt=0)             # m/s
    turn_probabilities:tuple[float, float, float] = (0.5, 0.25, 0.25)   # (straight, left, right)
    min_headway_s:float = Field(default=2.0, gt=0)          # same-lane spawn separation
    car_dims:tuple[float, float, float] = (4.5, 1.8, 1.5)
    truck_dims:tuple[float, float, float] = (12.0, 2.5, 3.0)

    @model_validator(mode='after')
    def _consistent(self):
        if self.speed_max < self.speed_min: raise ValueError('speed_max must be >= speed_min')
        if abs(sum(self.turn_probabilities) - 1.0) > 1e-9: raise ValueError('turn_probabilities must sum to 1')
        if min(self.turn_probabilities) < 0: raise ValueError('turn_probabilities must be >= 0')
        if min(self.car_dims) <= 0 or min(self.truck_dims) <= 0: raise ValueError('vehicle dims must be > 0')
        return self

    @property
    def road_half_width(self) -> float:
        return self.lanes_per_direction * self.lane_width

