import os

from tqdm import tqdm
from collections import deque

from schemas import Scenario, RunConfig, WorldSnapshot, PredictionFrame, Topology, VehicleState, Vec3, WeightedConnectionGraph
from utils import (
    print_log, log_verbose, make_rng, config_hash, write_json,
    snapshot_at, predict, degenerate_frame, heatmap_update,
    build_connection_graph, plan_topology, default_demands,
    baseline_graph, baseline_sdvn, baseline_single_hop, baseline_max_possible, evaluate_topology
)

from .ErrorHeatmap import ErrorHeatmap
from .LinkSampler import LinkSampler
from .TopologySchedule import TopologySchedule
from .MetricsAccumulator import MetricsAccumulator
from .MetricsTimeline import MetricsTimeline


class SimulationEngine:

    scenario:Scenario                   # Ground truth
    cfg:RunConfig                       # Method and all model parameters
    heatmap:ErrorHeatmap                # Prediction error map, updated while the proposed method runs
    sampler:LinkSampler                 # Ground-truth channel draws
    graph_dir:str|None                  # Where to dump the offset-0 graph of every routing tick (None = off)
    progress:bool                       # Show a tqdm bar over timesteps
    _frame:PredictionFrame|None         # Prediction of the latest routing tick


    def __init__(self, scenario:Scenario, cfg:RunConfig, graph_dir:str|None=None, progress:bool=False):

        # Fail before simulating anything if the two documents disagree
        if abs(cfg.time_scale.timestep_ms - scenario.timestep_ms) > 1e-9:
            raise ValueError(
                f'time_scale.timestep_ms ({cfg.time_scale.timestep_ms}) does not match the scenario timestep_ms ({scenario.timestep_ms}).'
            )

        self.scenario = scenario
        self.cfg = cfg
        self.heatmap = ErrorHeatmap(cfg.heatmap, cfg.routing.epsilon_default)
        self.sampler = LinkSampler(cfg.seed)
        self.graph_dir = graph_dir
        self.progress = progress
        self._frame = None


    # ---- Planning ---- #

    def _dump_graph(self, t:int, graph:WeightedConnectionGraph) -> None:
        if self.graph_dir is None: return
        write_json(os.path.join(self.graph_dir, f'graph_t{t}.json'), graph.to_dict())


    def _plan_proposed(self, t:int, history:deque[WorldSnapshot]) -> TopologySchedule:
        """Predicts the horizon and returns the schedule of topologies planned on it."""
        ts = self.cfg.time_scale
        current:WorldSnapshot = history[-1]

        # Warm-up: not enough history yet, so the future looks like the present
        if len(history) < ts.history_window:
            frame:PredictionFrame = degenerate_frame(current, ts.horizon)
        else:
            frame = predict(
                list(history), ts.horizon, self.cfg.predictor, make_rng(self.cfg.seed, 'predict', t),
                timestep_s=self.scenario.timestep_s, scenario=self.scenario
            )
        self._frame = frame

        # Freeze what the planner sees at this tick
        heatmap:ErrorHeatmap = self.heatmap.copy()
        eps_positions:dict[str, Vec3]|None = (
            {v.id: v.position for v in current.vehicles} if self.cfg.routing.epsilon_lookup == 'current' else None
        )

        def planner(offset:int) -> Topology:
            if offset > 0 and frame.degenerate:
                return schedule.topology_at(t)

            states:list[VehicleState] = list(current.vehicles) if offset == 0 else frame.states_at(offset)
            graph:WeightedConnectionGraph = build_connection_graph(
                states, current.rsu, current.buildings, heatmap,
                self.cfg.channel, self.cfg.budget, self.cfg.routing, eps_positions
            )
            if offset == 0: self._dump_graph(t, graph)
            return plan_topology(graph, default_demands(states, current.rsu), self.cfg.routing)

        schedule:TopologySchedule = TopologySchedule(t, ts.horizon, planner)
        return schedule


    def _plan_baseline(self, t:int, current:WorldSnapshot) -> TopologySchedule:
        """Plans once from the current snapshot and holds that plan for the whole interval."""
        graph:WeightedConnectionGraph = baseline_graph(current, self.cfg.channel, self.cfg.budget, self.cfg.routing)
        self._dump_graph(t, graph)

        match self.cfg.method:
            case 'sdvn': topology = baseline_sdvn(current, self.cfg.channel, self.cfg.budget, self.cfg.routing, graph=graph)
            case 'single-hop': topology = baseline_single_hop(current, self.cfg.channel, self.cfg.budget, self.cfg.routing, graph=graph)
            case _: raise ValueError(f'"{self.cfg.method}" is not a baseline method.')

        return TopologySchedule(t, self.cfg.time_scale.routing_exec_interval, lambda offset: topology)


    # ---- Heatmap ---- #

    def _update_heatmap(self, truth:WorldSnapshot) -> None:
        """Feeds the active prediction's error at this timestep into the heatmap."""
        frame:PredictionFrame|None = self._frame
        if frame is None or frame.degenerate: return

        offset:int = truth.t - frame.base_t
        if not 1 <= offset <= frame.horizon: return

        for vid in frame.vehicle_ids():
            actual:VehicleState|None = truth.vehicle(vid)
            if actual is not None:
                heatmap_update(self.heatmap, frame.state(vid, offset).position, actual.position)


    # ---- Loop ---- #

    def run(self) -> MetricsTimeline:
        """Simulates every timestep of the scenario and returns the metrics timeline.

            Returns:
                MetricsTimeline: per-timestep connectivity counts and throughput, plus the config echo.
        """
        ts = self.cfg.time_scale
        method:str = self.cfg.method
        history:deque[WorldSnapshot] = deque(maxlen=ts.history_window)
        acc:MetricsAccumulator = MetricsAccumulator()
        schedule:TopologySchedule|None = None

        print_log('INFO', 'SimulationEngine.run()', f'method={method} seed={self.cfg.seed} vehicles={len(self.scenario.vehicles)} timesteps={self.scenario.duration}')

        for t in tqdm(range(self.scenario.duration), desc=f'Simulating ({method})', disable=not (self.progress and log_verbose())):
            truth:WorldSnapshot = snapshot_at(self.scenario, t)
            history.append(truth)
            self.sampler.set_interval(t // ts.routing_exec_interval)

            if method == 'proposed':
                self._update_heatmap(truth)

            # Routing tick
            if method == 'max-possible':
                topology:Topology = baseline_max_possible(truth, self.cfg.channel, self.cfg.budget, self.cfg.routing, self.sampler)
            else:
                if t % ts.routing_exec_interval == 0 or schedule is None or not schedule.covers(t):
                    schedule = self._plan_proposed(t, history) if method == 'proposed' else self._plan_baseline(t, truth)

                # The applied topology only changes on topology control steps
                offset:int = t - schedule.base_t
                topology = schedule.topology_at(t - offset % ts.topology_control_interval)

            acc.record(t, evaluate_topology(topology, truth, self.cfg.channel, self.cfg.budget, self.sampler))

        cfg_dict:dict = self.cfg.to_json_dict()
        timeline:MetricsTimeline = MetricsTimeline(acc, method, self.cfg.seed, config_hash(cfg_dict), cfg_dict)

        conn = timeline.connectivity
        print_log('SUCCESS', 'SimulationEngine.run()', f'method={method} connectivity={"undefined" if conn is None else f"{conn:.4f}"}')
        return timeline
