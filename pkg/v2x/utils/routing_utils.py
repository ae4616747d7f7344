import heapq
import numpy as np
import networkx as nx

from typing import TYPE_CHECKING

from schemas import (
    Vec3, Segment, OrientedBox, VehicleState, RsuNode, WorldSnapshot,
    ChannelParams, LinkBudget, RoutingParams,
    AntennaNode, Route, PlannedRoute, Topology, WeightedConnectionGraph,
    antenna_id, owner_of, GEOM_TOL
)
from .geometry_utils import boxes_to_arrays, segment_box_entries, perpendicular_distances, vehicle_box, antenna_array
from .channel_utils import effective_distance, path_loss_array, blocking_loss_mean

if TYPE_CHECKING:
    from objects import ErrorHeatmap


PAIR_CHUNK:int = 4096   # antenna pairs per vectorized LOS batch


# ---- Link weighting ---- #

def _epsilon(heatmap:'ErrorHeatmap|None', pos:Vec3, params:RoutingParams) -> float:
    return heatmap.lookup(pos) if heatmap is not None else params.epsilon_default


def _brf_batch(starts:np.ndarray, ends:np.ndarray, eps_ends:np.ndarray, centers:np.ndarray, eps_blockers:np.ndarray, excluded:np.ndarray, params:RoutingParams) -> np.ndarray:
    """Blocking risk factor of M links against V candidate blockers.

        Parameters:
            starts, ends (np.ndarray): (M,3) link endpoints.
            eps_ends (np.ndarray): (M,) eps_S + eps_D per link.
            centers (np.ndarray): (V,3) blocker box centers.
            eps_blockers (np.ndarray): (V,) prediction error at each blocker.
            excluded (np.ndarray): (M,V) True where the vehicle is an endpoint of the link.
            params (RoutingParams): corridor and cap.

        Returns:
            np.ndarray: (M,) BRF per link, 0 where no vehicle is a potential blocker.
    """
    m:int = starts.shape[0]
    if m == 0 or centers.shape[0] == 0: return np.zeros(m)

    dist, t = perpendicular_distances(starts, ends, centers)
    candidate = (t >= 0.0) & (t <= 1.0) & (dist < params.brf_corridor) & ~excluded

    # A blocker centered on the link makes the ratio blow up, cap it
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = (eps_ends[:, None] + eps_blockers[None, :]) / dist
    ratio = np.where(dist <= GEOM_TOL, params.brf_max, np.minimum(ratio, params.brf_max))
    ratio = np.where(candidate, ratio, 0.0)
    return ratio.max(axis=1)


def blocking_risk_factor(link:Segment, candidates:list[VehicleState], heatmap:'ErrorHeatmap|None', params:RoutingParams, eps_source:float|None=None, eps_dest:float|None=None) -> float:
    """Blocking risk factor of one link.

        Parameters:
            link (Segment): the link vector, positive length.
            candidates (list[VehicleState]): vehicles that may block it (the link's own vehicles already removed).
            heatmap (ErrorHeatmap|None): prediction error source; None means epsilon_default everywhere.
            params (RoutingParams): corridor, cap and default epsilon.
            eps_source (float, optional): error at the source end (looked up at link.start when None). Use 0 for the RSU.
            eps_dest (float, optional): error at the destination end (looked up at link.end when None).

        Returns:
            float: max over potential blockers of (eps_S + eps_D + eps_blocking) / perpendicular distance, 0 if none.
    """
    if link.length() <= GEOM_TOL:
        raise ValueError('Blocking risk factor is undefined for a zero-length link.')

    eps_s:float = _epsilon(heatmap, link.start, params) if eps_source is None else eps_source
    eps_d:float = _epsilon(heatmap, link.end, params) if eps_dest is None else eps_dest
    if not candidates: return 0.0

    centers:np.ndarray = np.array([vehicle_box(v).center.as_array() for v in candidates])
    eps_blk:np.ndarray = np.array([_epsilon(heatmap, v.position, params) for v in candidates])
    brf:np.ndarray = _brf_batch(
        link.start.as_array()[None, :], link.end.as_array()[None, :], np.array([eps_s + eps_d]),
        centers, eps_blk, np.zeros((1, len(candidates)), dtype=bool), params
    )
    return float(brf[0])


def link_weight(pl:float, brf:float, bl_mean:float, lambda_:float) -> float:
    """Planning weight of a link in dB: pl + lambda * brf * bl_mean."""
    return pl + lambda_ * brf * bl_mean


# ---- Connection graph ---- #

def build_connection_graph(predicted:list[VehicleState], rsu:RsuNode, buildings:tuple[OrientedBox, ...]|list[OrientedBox], heatmap:'ErrorHeatmap|None', channel:ChannelParams, budget:LinkBudget, params:RoutingParams, eps_positions:dict[str, Vec3]|None=None) -> WeightedConnectionGraph:
    """Builds the weighted antenna graph for one (predicted or current) set of vehicle states.

        Parameters:
            predicted (list[VehicleState]): every vehicle's state at the planned timestep; connected ones get antennas, all block.
            rsu (RsuNode): the roadside unit (one antenna, zero prediction error).
            buildings (list[OrientedBox]): static obstacles.
            heatmap (ErrorHeatmap|None): source of the eps values for BRF.
            channel (ChannelParams): path loss and blocking loss parameters (planning uses means only).
            budget (LinkBudget): feasibility threshold on the mean path loss.
            params (RoutingParams): lambda, corridor and cap.
            eps_positions (dict[str, Vec3], optional): per vehicle position to look eps up at instead of its planned position.

        Returns:
            WeightedConnectionGraph: LOS-clear, feasible links with pl, brf, bl_mean and weight, plus zero-weight internal edges.
    """
    graph:WeightedConnectionGraph = WeightedConnectionGraph()
    vehicles:list[VehicleState] = sorted(predicted, key=lambda v: v.id)
    connected:list[VehicleState] = [v for v in vehicles if v.connected]

    # Owner codes: vehicles by sorted position, the RSU last, buildings -1
    code_of:dict[str, int] = {v.id: i for i, v in enumerate(vehicles)}
    rsu_code:int = len(vehicles)
    eps_positions = eps_positions or {}

    def eps_at(v:VehicleState) -> float:
        return _epsilon(heatmap, eps_positions.get(v.id, v.position), params)

    # ---- Antennas ---- #
    ids:list[str] = [antenna_id(rsu.id, 0)]
    owners:list[int] = [rsu_code]
    eps:list[float] = [0.0]
    positions:list[np.ndarray] = [rsu.position.as_array()[None, :]]
    graph.add_antenna(AntennaNode(ids[0], rsu.id, 0, rsu.position))

    for v in connected:
        corners:np.ndarray = antenna_array(v)
        e:float = eps_at(v)
        for idx, row in enumerate(corners):
            node = AntennaNode(antenna_id(v.id, idx), v.id, idx, Vec3.from_array(row))
            graph.add_antenna(node)
            ids.append(node.id)
            owners.append(code_of[v.id])
            eps.append(e)
        positions.append(corners)
        graph.add_intra_links(v.id)

    ant_pos:np.ndarray = np.vstack(positions)
    ant_owner:np.ndarray = np.array(owners)
    ant_eps:np.ndarray = np.array(eps)

    # ---- Candidate pairs: distinct owners, mean path loss within budget ---- #
    ii, jj = np.triu_indices(len(ids), k=1)
    keep = ant_owner[ii] != ant_owner[jj]
    ii, jj = ii[keep], jj[keep]

    dist:np.ndarray = np.linalg.norm(ant_pos[jj] - ant_pos[ii], axis=1)
    eff:np.ndarray = effective_distance(dist)
    pl:np.ndarray = path_loss_array(eff, channel)
    keep = (pl <= budget.max_total_loss) & (dist > GEOM_TOL)
    ii, jj, eff, pl = ii[keep], jj[keep], eff[keep], pl[keep]
    if ii.size == 0: return graph

    # ---- Obstacles: buildings then every vehicle body ---- #
    boxes:list[OrientedBox] = list(buildings) + [vehicle_box(v) for v in vehicles]
    box_owner:np.ndarray = np.array([-1] * len(buildings) + [code_of[v.id] for v in vehicles], dtype=np.int64)
    centers, halves, yaws = boxes_to_arrays(boxes)

    blk_centers:np.ndarray = centers[len(buildings):]
    blk_owner:np.ndarray = box_owner[len(buildings):]
    blk_eps:np.ndarray = np.array([eps_at(v) for v in vehicles]) if vehicles else np.zeros(0)

    for lo in range(0, ii.size, PAIR_CHUNK):
        ci, cj = ii[lo:lo + PAIR_CHUNK], jj[lo:lo + PAIR_CHUNK]
        starts, ends = ant_pos[ci], ant_pos[cj]
        own_a, own_b = ant_owner[ci], ant_owner[cj]

        # LOS against everything except the two endpoint vehicles
        entries:np.ndarray = segment_box_entries(starts, ends, centers, halves, yaws)
        excluded:np.ndarray = (box_owner[None, :] == own_a[:, None]) | (box_owner[None, :] == own_b[:, None])
        clear:np.ndarray = ~np.any(np.isfinite(entries) & ~excluded, axis=1)
        if not np.any(clear): continue

        starts, ends = starts[clear], ends[clear]
        sel_i, sel_j = ci[clear], cj[clear]
        sel_eff, sel_pl = eff[lo:lo + PAIR_CHUNK][clear], pl[lo:lo + PAIR_CHUNK][clear]

        blk_excluded:np.ndarray = (blk_owner[None, :] == ant_owner[sel_i][:, None]) | (blk_owner[None, :] == ant_owner[sel_j][:, None])
        brf:np.ndarray = _brf_batch(starts, ends, ant_eps[sel_i] + ant_eps[sel_j], blk_centers, blk_eps, blk_excluded, params)
        bl:np.ndarray = blocking_loss_mean(sel_eff, channel)

        for k in range(sel_i.size):
            u, v = ids[sel_i[k]], ids[sel_j[k]]
            b:float = float(np.asarray(bl)[k])
            graph.add_link(u, v, pl=float(sel_pl[k]), brf=float(brf[k]), bl_mean=b, weight=link_weight(float(sel_pl[k]), float(brf[k]), b, params.lambda_))

    return graph


# ---- Shortest paths ---- #

def path_weight(graph:nx.Graph, nodes:tuple, weight:str='weight') -> float:
    """Sums the edge weights along the node sequence, in order from the first node."""
    total:float = 0.0
    for u, v in zip(nodes, nodes[1:]):
        total += graph.edges[u, v][weight]
    return total


def _dijkstra(graph:nx.Graph, s, d, weight:str, ignore_nodes:set, ignore_edges:set) -> Route|None:
    """Dijkstra over (cost, path) heap entries so equal costs resolve to the lexicographically smallest node sequence."""
    heap:list[tuple[float, tuple]] = [(0.0, (s,))]
    settled:set = set()

    while heap:
        cost, path = heapq.heappop(heap)
        u = path[-1]
        if u in settled: continue
        settled.add(u)
        if u == d: return Route(nodes=path, weight=cost)

        for v, attrs in graph[u].items():
            if v in settled or v in ignore_nodes or frozenset((u, v)) in ignore_edges: continue
            heapq.heappush(heap, (cost + attrs[weight], path + (v,)))

    return None


def dijkstra(graph:nx.Graph, s, d, weight:str='weight') -> Route|None:
    """Minimum-weight simple path from s to d (None if unreachable); ties go to the lexicographically smallest path.

        Edge weights must be positive for the tie-break to be exact.
    """
    for node in (s, d):
        if node not in graph: raise KeyError(f'Node "{node}" is not in the graph.')
    if s == d: return Route(nodes=(s,), weight=0.0)
    return _dijkstra(graph, s, d, weight, set(), set())


def yen_k_shortest(graph:nx.Graph, s, d, k:int, weight:str='weight') -> list[Route]:
    """The k lowest-weight loopless paths from s to d in non-decreasing weight order.

        Parameters:
            graph (nx.Graph): undirected graph with positive edge weights.
            s, d: source and destination nodes.
            k (int): number of paths, >= 1.
            weight (str, optional): edge attribute holding the weight. Defaults to "weight".

        Returns:
            list[Route]: up to k routes; the list for k - 1 is always a prefix of the list for k.
    """
    if k < 1:
        raise ValueError(f'k must be >= 1, got {k}.')

    first:Route|None = dijkstra(graph, s, d, weight)
    if first is None: return []
    if s == d: return [first]

    found:list[Route] = [first]
    seen:set[tuple] = {first.nodes}
    candidates:list[tuple[float, tuple]] = []

    while len(found) < k:
        last:tuple = found[-1].nodes

        for i in range(len(last) - 1):
            spur, root = last[i], last[:i + 1]

            # Hide the next edge of every accepted path sharing this root, and the root itself
            ignore_edges:set = {frozenset((p.nodes[i], p.nodes[i + 1])) for p in found if len(p.nodes) > i + 1 and p.nodes[:i + 1] == root}
            ignore_nodes:set = set(root[:-1])

            tail:Route|None = _dijkstra(graph, spur, d, weight, ignore_nodes, ignore_edges)
            if tail is None: continue

            nodes:tuple = root[:-1] + tail.nodes
            if nodes in seen: continue
            seen.add(nodes)
            heapq.heappush(candidates, (path_weight(graph, nodes, weight), nodes))

        if not candidates: break
        cost, nodes = heapq.heappop(candidates)
        found.append(Route(nodes=nodes, weight=cost))

    return found


# ---- Topology planning ---- #

def default_demands(states:list[VehicleState], rsu:RsuNode) -> list[tuple[str, str]]:
    """One uplink demand per connected vehicle, ordered by vehicle id."""
    return [(v.id, rsu.id) for v in sorted(states, key=lambda v: v.id) if v.connected]


def _expand(entity_graph:nx.Graph, route:Route) -> PlannedRoute:
    """Turns an owner-level route into a PlannedRoute carrying the antenna pair of every hop."""
    hops:list[tuple[str, str]] = []
    for a, b in zip(route.nodes, route.nodes[1:]):
        x, y = entity_graph.edges[a, b]['hop']
        hops.append((x, y) if owner_of(x) == a else (y, x))
    return PlannedRoute(entities=tuple(route.nodes), hops=tuple(hops), weight=route.weight)


def plan_topology(graph:WeightedConnectionGraph, demands:list[tuple[str, str]], params:RoutingParams) -> Topology:
    """Top n_routes routes per demand over the owner-level view of the graph (empty list when disconnected)."""
    entity_graph:nx.Graph = graph.entity_graph()
    topology:Topology = Topology()

    for source, dest in demands:
        if source not in entity_graph or dest not in entity_graph or source == dest:
            topology.routes[(source, dest)] = []
            continue

        routes:list[Route] = yen_k_shortest(entity_graph, source, dest, params.n_routes)
        topology.routes[(source, dest)] = [_expand(entity_graph, r) for r in routes]

    return topology


def baseline_graph(current:WorldSnapshot, channel:ChannelParams, budget:LinkBudget, params:RoutingParams) -> WeightedConnectionGraph:
    """Path-loss-only graph (lambda = 0) of the current snapshot."""
    plain:RoutingParams = params.model_copy(update={'lambda_': 0.0})
    return build_connection_graph(list(current.vehicles), current.rsu, current.buildings, None, channel, budget, plain)


def baseline_sdvn(current:WorldSnapshot, channel:ChannelParams, budget:LinkBudget, params:RoutingParams, graph:WeightedConnectionGraph|None=None) -> Topology:
    """Centralized SDVN routing: one shortest path-loss route per vehicle on the current positions."""
    graph = graph or baseline_graph(current, channel, budget, params)
    single:RoutingParams = params.model_copy(update={'lambda_': 0.0, 'n_routes': 1})
    return plan_topology(graph, default_demands(list(current.vehicles), current.rsu), single)


def baseline_single_hop(current:WorldSnapshot, channel:ChannelParams, budget:LinkBudget, params:RoutingParams, graph:WeightedConnectionGraph|None=None) -> Topology:
    """Direct-only routing: each vehicle's lowest path loss LOS antenna link to the RSU, never through relays."""
    graph = graph or baseline_graph(current, channel, budget, params)
    rsu_ant:str = antenna_id(current.rsu.id, 0)
    topology:Topology = Topology()

    for source, dest in default_demands(list(current.vehicles), current.rsu):
        best:tuple[float, str]|None = None
        for ant in graph.antennas_of(source):
            if not graph.graph.has_edge(ant, rsu_ant): continue
            option = (graph.link(ant, rsu_ant)['pl'], ant)
            if best is None or option < best: best = option

        topology.routes[(source, dest)] = [] if best is None else [
            PlannedRoute(entities=(source, dest), hops=((best[1], rsu_ant),), weight=best[0])
        ]

    return topology
