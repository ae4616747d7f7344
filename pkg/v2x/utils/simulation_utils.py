import numpy as np

from typing import TYPE_CHECKING, Protocol

from schemas import (
    Vec3, WorldSnapshot, ChannelParams, LinkBudget, RoutingParams, Topology, PlannedRoute,
    VehicleOutcome, AntennaNode, WeightedConnectionGraph, antenna_id, GEOM_TOL
)
from .geometry_utils import boxes_to_arrays, segment_box_entries, vehicle_box, antenna_array
from .channel_utils import effective_distance, path_loss_array, blocking_loss_mean, link_feasible, shannon_throughput, route_throughput, diversity_throughput
from .routing_utils import plan_topology, default_demands

if TYPE_CHECKING:
    from objects import MetricsAccumulator


class LinkDraws(Protocol):
    """Anything that hands out the (shadow, blocking) standard normal pair of a link for the current interval."""

    def draws(self, a:str, b:str) -> tuple[float, float]: ...


def truth_antennas(truth:WorldSnapshot) -> dict[str, tuple[str, np.ndarray]]:
    """Antenna id -> (owner, position) of the RSU and every connected vehicle at ground truth."""
    antennas:dict[str, tuple[str, np.ndarray]] = {antenna_id(truth.rsu.id, 0): (truth.rsu.id, truth.rsu.position.as_array())}
    for v in truth.connected_vehicles():
        for idx, row in enumerate(antenna_array(v)):
            antennas[antenna_id(v.id, idx)] = (v.id, row)
    return antennas


def realized_losses(pairs:list[tuple[str, str]], truth:WorldSnapshot, channel:ChannelParams, sampler:LinkDraws, antennas:dict|None=None) -> np.ndarray:
    """Ground-truth total loss (dB) of each antenna pair.

        Parameters:
            pairs (list[tuple[str, str]]): antenna id pairs of distinct owners.
            truth (WorldSnapshot): actual world state.
            channel (ChannelParams): channel model.
            sampler (LinkDraws): per-link random draws of the current interval.
            antennas (dict, optional): precomputed truth_antennas(truth).

        Returns:
            np.ndarray: path loss + shadow sample (+ blocking loss sample when a vehicle occludes the link);
            inf when a building occludes it or an endpoint is not present.
    """
    out:np.ndarray = np.full(len(pairs), np.inf)
    if not pairs: return out
    antennas = antennas if antennas is not None else truth_antennas(truth)

    present:list[int] = [k for k, (a, b) in enumerate(pairs) if a in antennas and b in antennas]
    if not present: return out

    starts:np.ndarray = np.array([antennas[pairs[k][0]][1] for k in present])
    ends:np.ndarray = np.array([antennas[pairs[k][1]][1] for k in present])
    own_a:list[str] = [antennas[pairs[k][0]][0] for k in present]
    own_b:list[str] = [antennas[pairs[k][1]][0] for k in present]

    # Buildings are fatal, other vehicles add a blocking loss sample
    vehicles = list(truth.vehicles)
    centers, halves, yaws = boxes_to_arrays(list(truth.buildings) + [vehicle_box(v) for v in vehicles])
    entries:np.ndarray = segment_box_entries(starts, ends, centers, halves, yaws)
    n_build:int = len(truth.buildings)

    building_hit:np.ndarray = np.any(np.isfinite(entries[:, :n_build]), axis=1)
    veh_ids:np.ndarray = np.array([v.id for v in vehicles], dtype=object)
    own_mask:np.ndarray = (veh_ids[None, :] == np.array(own_a, dtype=object)[:, None]) | (veh_ids[None, :] == np.array(own_b, dtype=object)[:, None])
    vehicle_hit:np.ndarray = np.any(np.isfinite(entries[:, n_build:]) & ~own_mask, axis=1) if vehicles else np.zeros(len(present), dtype=bool)

    eff:np.ndarray = effective_distance(np.linalg.norm(ends - starts, axis=1))
    pl:np.ndarray = path_loss_array(eff, channel)
    bl_mean:np.ndarray = np.atleast_1d(blocking_loss_mean(eff, channel))

    for n, k in enumerate(present):
        if building_hit[n]: continue
        z_sf, z_bl = sampler.draws(*pairs[k])
        total:float = float(pl[n]) + channel.sigma_sf * z_sf
        if vehicle_hit[n]: total += float(bl_mean[n]) + channel.sigma_bl * z_bl
        out[k] = total
    return out


def evaluate_topology(topology:Topology, truth:WorldSnapshot, channel:ChannelParams, budget:LinkBudget, sampler:LinkDraws) -> list[VehicleOutcome]:
    """Applies the planned routes to the actual world state.

        A hop is alive when no building occludes it and its realized loss fits the budget; a route is alive when all
        its hops are; a vehicle succeeds when any of its routes is alive. Its throughput is the best alive route's
        weakest hop (0 on failure).

        Returns:
            list[VehicleOutcome]: one outcome per connected vehicle present in truth, ordered by id.
    """
    antennas:dict = truth_antennas(truth)
    present:set[str] = {v.id for v in truth.vehicles}

    # Evaluate every distinct hop once
    hops:list[tuple[str, str]] = sorted({
        tuple(sorted(hop))
        for src in topology.sources()
        for route in topology.routes_for(src)
        for hop in route.hops
    })
    losses:dict[tuple[str, str], float] = dict(zip(hops, realized_losses(hops, truth, channel, sampler, antennas)))

    def route_rate(route:PlannedRoute) -> float|None:
        if any(e not in present and e != truth.rsu.id for e in route.entities): return None
        rates:list[float] = []
        for hop in route.hops:
            loss:float = losses[tuple(sorted(hop))]
            if not np.isfinite(loss) or not link_feasible(loss, budget): return None
            rates.append(shannon_throughput(loss, budget))
        return route_throughput(rates)

    outcomes:list[VehicleOutcome] = []
    for v in sorted(truth.connected_vehicles(), key=lambda s: s.id):
        alive:list[float] = [r for r in (route_rate(route) for route in topology.routes_for(v.id)) if r is not None]
        outcomes.append(VehicleOutcome(vehicle_id=v.id, success=bool(alive), throughput=diversity_throughput(alive)))
    return outcomes


def realized_graph(truth:WorldSnapshot, channel:ChannelParams, budget:LinkBudget, sampler:LinkDraws) -> WeightedConnectionGraph:
    """Graph of every hop that is actually alive at ground truth, weighted by its realized loss."""
    antennas:dict = truth_antennas(truth)
    graph:WeightedConnectionGraph = WeightedConnectionGraph()
    for aid, (owner, pos) in sorted(antennas.items()):
        graph.add_antenna(AntennaNode(aid, owner, int(aid.rsplit(':', 1)[1]), Vec3.from_array(pos)))
    for v in truth.connected_vehicles():
        graph.add_intra_links(v.id)

    ids:list[str] = sorted(antennas)
    pairs:list[tuple[str, str]] = [
        (a, b) for i, a in enumerate(ids) for b in ids[i + 1:]
        if antennas[a][0] != antennas[b][0] and np.linalg.norm(antennas[a][1] - antennas[b][1]) > GEOM_TOL
    ]
    losses:np.ndarray = realized_losses(pairs, truth, channel, sampler, antennas)

    for (a, b), loss in zip(pairs, losses):
        if np.isfinite(loss) and link_feasible(float(loss), budget):
            graph.add_link(a, b, pl=float(loss), brf=0.0, bl_mean=0.0, weight=float(loss))
    return graph


def baseline_max_possible(truth:WorldSnapshot, channel:ChannelParams, budget:LinkBudget, params:RoutingParams, sampler:LinkDraws) -> Topology:
    """Reference routing with perfect knowledge of the realized channel: one lowest-loss alive route per vehicle."""
    graph:WeightedConnectionGraph = realized_graph(truth, channel, budget, sampler)
    single:RoutingParams = params.model_copy(update={'n_routes': 1})
    return plan_topology(graph, default_demands(list(truth.vehicles), truth.rsu), single)


def connectivity(acc:'MetricsAccumulator') -> float:
    """Share of connected vehicle timesteps that were successfully connected."""
    if acc.cv_total_sum <= 0:
        raise ValueError('Connectivity is undefined: no connected vehicle was present at any timestep.')
    return acc.cv_successful_sum / acc.cv_total_sum
