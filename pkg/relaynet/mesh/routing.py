"""
Link-state routing with the table semantics the controllers rely on: for every
reachable destination, the first hop and the hop count.

Tables are shortest-hop routes; among equal-hop first hops the lowest NodeId wins.
Convergence is modelled by a single stability timer: tables are recomputed only once
the topology has not changed for `tau_route` seconds.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import networkx as nx
from relaynet.mesh.relay import relay_packet
from relaynet.mesh.types import (
    Delivered,
    LinkGraph,
    NodeId,
    Packet,
    RouteEntry,
    RoutingTable,
)

logger = logging.getLogger(__name__)

Tables = Dict[NodeId, RoutingTable]


def compute_tables(graph: LinkGraph, epoch: int = 0) -> Tables:
    g = graph.to_networkx()
    hops = dict(nx.all_pairs_shortest_path_length(g))

    tables = {}
    for u in graph.nodes:
        entries = {}
        for dest, h in sorted(hops[u].items()):
            if dest == u:
                continue
            next_hop = min(v for v in g[u] if hops[v].get(dest) == h - 1)
            entries[dest] = RouteEntry(next_hop=next_hop, hop_count=h)
        tables[u] = RoutingTable(owner=u, entries=entries, epoch=epoch)
    return tables


@dataclass(frozen=True)
class RoutingState:
    """
    `graph` is the topology seen at the previous tick, `changed_tick` the last tick
    it changed, `computed_from` the topology the published tables were built on.
    """

    tables: Tables
    graph: LinkGraph
    computed_from: LinkGraph
    changed_tick: int
    epoch: int

    @staticmethod
    def converged(graph: LinkGraph, now: int = 0) -> "RoutingState":
        return RoutingState(
            tables=compute_tables(graph, epoch=now),
            graph=graph,
            computed_from=graph,
            changed_tick=now,
            epoch=now,
        )


def tau_ticks(tau_route: float, dt: float) -> int:
    assert tau_route >= 0 and dt > 0
    return int(round(tau_route / dt))


def tick_routing(
    state: RoutingState, graph: LinkGraph, now: int, tau_route: float, dt: float
) -> RoutingState:
    changed_tick = state.changed_tick
    if graph != state.graph:
        changed_tick = now

    stale = graph != state.computed_from
    if stale and now - changed_tick >= tau_ticks(tau_route, dt):
        logger.debug(f"tick {now}: routing converged on {sorted(graph.edges)}")
        return RoutingState(
            tables=compute_tables(graph, epoch=now),
            graph=graph,
            computed_from=graph,
            changed_tick=changed_tick,
            epoch=now,
        )

    return RoutingState(
        tables=state.tables,
        graph=graph,
        computed_from=state.computed_from,
        changed_tick=changed_tick,
        epoch=state.epoch,
    )


def current_path(
    tables: Mapping[NodeId, RoutingTable],
    graph: LinkGraph,
    src: NodeId,
    dst: NodeId,
) -> Optional[List[NodeId]]:
    """The hops a packet src -> dst would take right now, or None if it would be dropped."""
    outcome = relay_packet(Packet(seq=-1, src=src, dst=dst, created_tick=-1), tables, graph)
    if isinstance(outcome, Delivered):
        return outcome.hop_trace
    return None


def path_members(path: Optional[List[NodeId]]) -> List[NodeId]:
    """Nodes strictly between the two end points."""
    if not path:
        return []
    return path[1:-1]


def format_table(table: RoutingTable, names: Optional[Mapping[NodeId, str]] = None) -> str:
    names = names or {}

    def _name(u: NodeId) -> str:
        return names.get(u, str(u))

    lines = [f"routing table of {_name(table.owner)} (epoch {table.epoch})"]
    lines.append(f"{'destination':>12} {'first hop':>10} {'hops':>5}")
    for dest in sorted(table.entries):
        e = table.entries[dest]
        lines.append(f"{_name(dest):>12} {_name(e.next_hop):>10} {e.hop_count:>5}")
    return "\n".join(lines)
