import networkx as nx

from typing import Literal
from dataclasses import dataclass, field
from pydantic import Field

from .base import StrictModel
from .geometry import Vec3


class RoutingParams(StrictModel):

    lambda_:float = Field(default=1.0, ge=0, alias='lambda')   # Blocking term weight
    n_routes:int = Field(default=3, ge=1)                       # Routes per demand
    brf_corridor:float = Field(default=10.0, gt=0)              # meters
    brf_max:float = Field(default=100.0, gt=0)                  # Cap when L_perp -> 0
    epsilon_default:float = Field(default=1.0, ge=0)            # meters, unseen heatmap cells
    epsilon_lookup:Literal['predicted', 'current'] = 'predicted'


def antenna_id(owner:str, index:int) -> str:
    """Graph node id of the given antenna, e.g. "v007:2"."""
    return f'{owner}:{index}'


def owner_of(node_id:str) -> str:
    """Owner (vehicle id or "rsu") of the given antenna node id."""
    return node_id.rsplit(':', 1)[0]


@dataclass(frozen=True, slots=True)
class AntennaNode:

    id:str          # "<owner>:<index>"
    owner:str       # vehicle id or "rsu"
    index:int       # 0..3 = front-left, front-right, rear-left, rear-right; RSU is 0
    position:Vec3


@dataclass(frozen=True, slots=True)
class Route:
    """A path returned by the shortest-path search: node sequence and total weight."""

    nodes:tuple
    weight:float


@dataclass(frozen=True, slots=True)
class PlannedRoute:
    """One route of a demand, at both granularities.

    entities: the vehicle-level sequence S, R1, ..., D.
    hops: the antenna pair used for each inter-entity hop.
    """

    entities:tuple[str, ...]
    hops:tuple[tuple[str, str], ...]
    weight:float

    @property
    def antennas(self) -> tuple[str, ...]:
        """The antenna-level route; consecutive antennas of one owner are joined by a zero-weight internal edge."""
        seq:list[str] = []
        for a, b in self.hops:
            if not seq or seq[-1] != a: seq.append(a)
            seq.append(b)
        return tuple(seq)


@dataclass
class Topology:
    """Per demand (source -> destination) the planned routes, best first."""

    routes:dict[tuple[str, str], list[PlannedRoute]] = field(default_factory=dict)

    def routes_for(self, source:str) -> list[PlannedRoute]:
        """All routes planned for demands that start at the given source."""
        found:list[PlannedRoute] = []
        for (s, _), routes in sorted(self.routes.items()):
            if s == source: found.extend(routes)
        return found

    def sources(self) -> list[str]:
        return sorted({s for s, _ in self.routes})


class WeightedConnectionGraph:

    graph:nx.Graph                  # Antenna-level graph, edge attrs: pl, brf, bl_mean, weight, intra
    nodes:dict[str, AntennaNode]    # Antenna id -> node
    _entity_graph:nx.Graph|None     # Cached owner-level graph


    def __init__(self):
        self.graph = nx.Graph()
        self.nodes = {}
        self._entity_graph = None


    def add_antenna(self, node:AntennaNode) -> None:
        """Adds the given antenna as a vertex."""
        self.nodes[node.id] = node
        self.graph.add_node(node.id, owner=node.owner)
        self._entity_graph = None


    def add_link(self, u:str, v:str, pl:float, brf:float, bl_mean:float, weight:float, intra:bool=False) -> None:
        """Adds an undirected link between two antennas with its channel annotations."""
        if u not in self.nodes or v not in self.nodes:
            raise KeyError(f'Cannot link unknown antenna(s) "{u}" - "{v}".')
        self.graph.add_edge(u, v, pl=pl, brf=brf, bl_mean=bl_mean, weight=weight, intra=intra)
        self._entity_graph = None


    def add_intra_links(self, owner:str) -> None:
        """Connects all antennas of the given owner with zero-weight edges."""
        ants:list[str] = self.antennas_of(owner)
        for i, u in enumerate(ants):
            for v in ants[i + 1:]:
                self.add_link(u, v, 0.0, 0.0, 0.0, 0.0, intra=True)


    def antennas_of(self, owner:str) -> list[str]:
        return sorted(nid for nid, node in self.nodes.items() if node.owner == owner)


    def owners(self) -> list[str]:
        return sorted({node.owner for node in self.nodes.values()})


    def link(self, u:str, v:str) -> dict:
        """Edge attributes between the two antennas (KeyError if absent)."""
        return self.graph.edges[u, v]


    def inter_links(self) -> list[tuple[str, str, dict]]:
        """All links between different owners, as sorted (u, v, attrs) with u < v."""
        found = [(min(u, v), max(u, v), d) for u, v, d in self.graph.edges(data=True) if not d['intra']]
        return sorted(found, key=lambda e: (e[0], e[1]))


    def entity_graph(self) -> nx.Graph:
        """Owner-level graph: one edge per owner pair carrying the lightest antenna link between them.

        Crossing a vehicle costs nothing (its internal edges weigh 0), so the cheapest antenna route
        through a sequence of owners is the sum of these per-pair minima.
        """
        if self._entity_graph is not None: return self._entity_graph

        g:nx.Graph = nx.Graph()
        g.add_nodes_from(self.owners())

        for u, v, d in self.inter_links():
            ou, ov = owner_of(u), owner_of(v)
            key:tuple[str, str] = (ou, ov) if ou < ov else (ov, ou)
            hop:tuple[str, str] = (u, v) if ou < ov else (v, u)
            current = g.get_edge_data(*key)

            # Keep the lightest pair; ties go to the lexicographically smaller antenna pair
            if current is None or (d['weight'], hop) < (current['weight'], current['hop']):
                g.add_edge(*key, weight=d['weight'], hop=hop)

        self._entity_graph = g
        return g


    def to_dict(self) -> dict:
        """Debug dump of the graph (sorted, JSON-ready)."""
        return {
            'nodes': [
                {
                    'id': n.id,
                    'owner': n.owner,
                    'index': n.index,
                    'position': [n.position.x, n.position.y, n.position.z]
                }
                for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ],
            'edges': [
                {'u': min(u, v), 'v': max(u, v), **d}
                for u, v, d in sorted(self.graph.edges(data=True), key=lambda e: (min(e[0], e[1]), max(e[0], e[1])))
            ]
        }
