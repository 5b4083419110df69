from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from relaynet.nsb.tasks import Vec2

NodeId = int


class Role(Enum):
    BASE = "Base"
    AGENT = "Agent"
    SUPPORT = "Support"


@dataclass
class RadioConfig:
    r_max: float = 20.0
    tau_route: float = 3.0
    los_enabled: bool = False


@dataclass(eq=False)
class LinkGraph:
    """
    Symmetric disc-model connectivity over the scenario nodes. `nodes` is sorted and
    indexes the rows and columns of `adjacency`.
    """

    nodes: Tuple[NodeId, ...]
    adjacency: np.ndarray  # (n, n) bool

    def __post_init__(self):
        n = len(self.nodes)
        assert self.adjacency.shape == (n, n)
        assert list(self.nodes) == sorted(self.nodes), "nodes must be sorted"
        self._index = {u: i for i, u in enumerate(self.nodes)}

    def index(self, u: NodeId) -> int:
        return self._index[u]

    def linked(self, u: NodeId, v: NodeId) -> bool:
        if u not in self._index or v not in self._index:
            return False
        return bool(self.adjacency[self._index[u], self._index[v]])

    def neighbors(self, u: NodeId) -> List[NodeId]:
        row = self.adjacency[self._index[u]]
        return [self.nodes[j] for j in np.flatnonzero(row)]

    @property
    def edges(self) -> FrozenSet[Tuple[NodeId, NodeId]]:
        iu, ju = np.nonzero(np.triu(self.adjacency, k=1))
        return frozenset((self.nodes[i], self.nodes[j]) for i, j in zip(iu, ju))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(sorted(self.edges))
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinkGraph):
            return NotImplemented
        return self.nodes == other.nodes and np.array_equal(
            self.adjacency, other.adjacency
        )

    @staticmethod
    def from_edges(nodes: Sequence[NodeId], edges) -> "LinkGraph":
        nodes = tuple(sorted(nodes))
        idx = {u: i for i, u in enumerate(nodes)}
        adj = np.zeros((len(nodes), len(nodes)), dtype=bool)
        for u, v in edges:
            if u == v:
                continue
            adj[idx[u], idx[v]] = adj[idx[v], idx[u]] = True
        return LinkGraph(nodes, adj)


@dataclass(frozen=True)
class RouteEntry:
    next_hop: NodeId
    hop_count: int


@dataclass(frozen=True)
class RoutingTable:
    owner: NodeId
    entries: Dict[NodeId, RouteEntry] = field(default_factory=dict)
    epoch: int = 0

    def route(self, dest: NodeId) -> Optional[RouteEntry]:
        return self.entries.get(dest)

    def next_hop(self, dest: NodeId) -> Optional[NodeId]:
        entry = self.entries.get(dest)
        return entry.next_hop if entry else None

    def has_route(self, dest: NodeId) -> bool:
        return dest in self.entries

    def one_hop(self) -> List[NodeId]:
        return sorted(d for d, e in self.entries.items() if e.hop_count == 1)


@dataclass
class Packet:
    seq: int
    src: NodeId
    dst: NodeId
    created_tick: int
    hop_trace: List[NodeId] = field(default_factory=list)
    delivered_tick: Optional[int] = None

    def __post_init__(self):
        if not self.hop_trace:
            self.hop_trace = [self.src]


class DropReason(Enum):
    NO_ROUTE = "NoRoute"
    LINK_DOWN = "LinkDown"
    TTL_EXCEEDED = "TtlExceeded"


@dataclass
class Delivered:
    packet: Packet

    @property
    def hop_trace(self) -> List[NodeId]:
        return self.packet.hop_trace


@dataclass
class Dropped:
    packet: Packet
    at: NodeId
    reason: DropReason

    @property
    def hop_trace(self) -> List[NodeId]:
        return self.packet.hop_trace


RelayOutcome = Union[Delivered, Dropped]


@dataclass(frozen=True)
class Beacon:
    """Status a node piggybacks on its position report."""

    on_path: bool = False
    predecessor: Optional[NodeId] = None


@dataclass(frozen=True, eq=False)
class NeighborReport:
    node: NodeId
    position: Vec2
    tick: int
    beacon: Beacon = Beacon()


@dataclass
class NeighborSnapshot:
    owner: NodeId
    reports: Dict[NodeId, NeighborReport] = field(default_factory=dict)

    def position(self, node: NodeId) -> Optional[Vec2]:
        report = self.reports.get(node)
        return report.position if report else None

    def __contains__(self, node: NodeId) -> bool:
        return node in self.reports

    def __len__(self) -> int:
        return len(self.reports)
