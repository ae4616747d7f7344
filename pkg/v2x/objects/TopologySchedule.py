from typing import Callable

from schemas import Topology


class TopologySchedule:
    """Topologies pre-planned at one routing tick for the offsets 0..horizon-1 that follow it.

    Offsets are planned on first use and memoized; the planner must only depend on state captured at the tick.
    """

    base_t:int                                  # Timestep of the routing tick
    horizon:int                                 # Number of offsets covered
    _planner:Callable[[int], Topology]          # offset -> topology
    _plans:dict[int, Topology]                  # Memoized offsets


    def __init__(self, base_t:int, horizon:int, planner:Callable[[int], Topology]):
        if horizon < 1:
            raise ValueError(f'A schedule must cover at least one offset, got horizon={horizon}.')
        self.base_t = base_t
        self.horizon = horizon
        self._planner = planner
        self._plans = {}


    def covers(self, t:int) -> bool:
        return 0 <= t - self.base_t < self.horizon


    def topology_at(self, t:int) -> Topology:
        """Returns the topology scheduled for timestep t."""
        offset:int = t - self.base_t
        if not 0 <= offset < self.horizon:
            raise ValueError(f'Timestep {t} is outside the schedule planned at t={self.base_t} (horizon {self.horizon}).')

        if offset not in self._plans:
            self._plans[offset] = self._planner(offset)
        return self._plans[offset]


    def planned_offsets(self) -> list[int]:
        return sorted(self._plans)
