from typing import Literal
from dataclasses import dataclass, field
from pydantic import Field, model_validator

from .base import StrictModel
from .geometry import Vec3
from .mobility import VehicleState


class PredictorConfig(StrictModel):

    kind:Literal['constant-velocity', 'noisy-oracle'] = 'noisy-oracle'
    nmse_target:float = Field(default=0.0046, ge=0)     # noisy-oracle only
    history_window:int = Field(default=10, ge=2)       # timesteps


class HeatmapConfig(StrictModel):

    origin_x:float = -200.0         # meters
    origin_y:float = -200.0         # meters
    cell_size:float = Field(default=5.0, gt=0)          # meters
    nx:int = Field(default=80, ge=1)
    ny:int = Field(default=80, ge=1)
    learning_rate:float = Field(default=0.1, gt=0, le=1)
    init_path:str|None = None       # Optional heatmap JSON to start from

    @model_validator(mode='after')
    def _finite_grid(self):
        if self.nx * self.ny > 4_000_000: raise ValueError('heatmap grid too large (nx * ny > 4e6)')
        return self


@dataclass(frozen=True)
class PredictionFrame:
    """Predicted states of every vehicle present at base_t for offsets 1..horizon.

    states[vehicle_id][k - 1] is the prediction for base_t + k.
    """

    base_t:int
    horizon:int
    base_positions:dict[str, Vec3]
    states:dict[str, tuple[VehicleState, ...]] = field(default_factory=dict)
    degenerate:bool = False     # True for warm-up frames that just repeat the current snapshot

    def __post_init__(self):
        if self.horizon < 1: raise ValueError(f'horizon must be >= 1, got {self.horizon}.')
        for vid, seq in self.states.items():
            if len(seq) != self.horizon:
                raise ValueError(f'vehicle "{vid}" has {len(seq)} predictions, expected {self.horizon}.')

    def vehicle_ids(self) -> list[str]:
        return sorted(self.states)

    def state(self, vehicle_id:str, offset:int) -> VehicleState:
        """Predicted state of the vehicle at base_t + offset (1 <= offset <= horizon)."""
        if not 1 <= offset <= self.horizon:
            raise ValueError(f'offset {offset} outside prediction horizon 1..{self.horizon}.')
        return self.states[vehicle_id][offset - 1]

    def states_at(self, offset:int) -> list[VehicleState]:
        """All predicted vehicle states at base_t + offset, ordered by id."""
        return [self.state(vid, offset) for vid in self.vehicle_ids()]
