from typing import Literal
from dataclasses import dataclass
from pydantic import Field, model_validator

from .base import StrictModel
from .channel import ChannelParams, LinkBudget
from .mobility import ScenarioConfig
from .prediction import PredictorConfig, HeatmapConfig
from .routing import RoutingParams


METHODS:tuple[str, ...] = ('proposed', 'sdvn', 'single-hop', 'max-possible')
Method = Literal['proposed', 'sdvn', 'single-hop', 'max-possible']


class TimeScaleParams(StrictModel):

    timestep_ms:float = Field(default=100.0, gt=0)
    topology_control_interval:int = Field(default=1, ge=1)     # timesteps
    routing_exec_interval:int = Field(default=10, ge=1)        # timesteps
    history_window:int = Field(default=10, ge=2)               # timesteps
    horizon:int = Field(default=50, ge=1)                      # timesteps

    @model_validator(mode='after')
    def _intervals_agree(self):
        if self.horizon < self.routing_exec_interval:
            raise ValueError(f'horizon ({self.horizon}) must be >= routing_exec_interval ({self.routing_exec_interval})')
        if self.topology_control_interval > self.routing_exec_interval:
            raise ValueError(f'topology_control_interval ({self.topology_control_interval}) must be <= routing_exec_interval ({self.routing_exec_interval})')
        return self


class RunConfig(StrictModel):

    method:Method = 'proposed'
    routing:RoutingParams = RoutingParams()
    channel:ChannelParams = ChannelParams()
    budget:LinkBudget = LinkBudget()
    predictor:PredictorConfig = PredictorConfig()
    time_scale:TimeScaleParams = TimeScaleParams()
    heatmap:HeatmapConfig = HeatmapConfig()
    seed:int = 0

    @model_validator(mode='after')
    def _windows_agree(self):
        if self.predictor.history_window != self.time_scale.history_window:
            raise ValueError(
                f'predictor.history_window ({self.predictor.history_window}) must equal '
                f'time_scale.history_window ({self.time_scale.history_window})'
            )
        return self

    def to_json_dict(self) -> dict:
        """The config as written to disk (λ under its JSON name "lambda")."""
        return self.model_dump(mode='json', by_alias=True)


class SweepSpec(StrictModel):

    parameter:Literal['lambda', 'nmse', 'n_routes', 'n_vehicles', 'method', 'connected_fraction']
    values:list[float|int|str] = Field(min_length=1)
    repetitions:int = Field(default=1, ge=1)        # seeds per value
    base_seed:int = 0                               # seeds are base_seed .. base_seed + repetitions - 1
    methods:list[Method]|None = None                # crossed with values (None = the base config's method)
    scenario:ScenarioConfig|None = None             # generated per seed
    scenario_path:str|None = None                   # or one fixed scenario file

    @model_validator(mode='after')
    def _scenario_source(self):
        if (self.scenario is None) == (self.scenario_path is None):
            raise ValueError('exactly one of "scenario" or "scenario_path" must be given')
        if self.parameter in ('n_vehicles', 'connected_fraction') and self.scenario_path is not None:
            raise ValueError(f'sweeping "{self.parameter}" needs a generated "scenario", not a fixed scenario_path')
        if self.parameter == 'method':
            bad = [v for v in self.values if v not in METHODS]
            if bad: raise ValueError(f'unknown method value(s) {bad}; expected one of {list(METHODS)}')
            if self.methods is not None: raise ValueError('"methods" cannot be combined with a method sweep')
        return self


@dataclass(frozen=True, slots=True)
class VehicleOutcome:
    """Ground-truth result of one connected vehicle at one timestep."""

    vehicle_id:str
    success:bool
    throughput:float    # bits/second, 0 on failure
