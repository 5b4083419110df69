"""
Store-and-forward relay of one datagram along the published routing tables.
"""
import copy
from typing import Mapping, Optional

from relaynet.mesh.types import (
    Delivered,
    DropReason,
    Dropped,
    LinkGraph,
    NodeId,
    Packet,
    RelayOutcome,
    RoutingTable,
)


def relay_packet(
    pkt: Packet,
    tables: Mapping[NodeId, RoutingTable],
    graph: LinkGraph,
    now: Optional[int] = None,
) -> RelayOutcome:
    """
    Walk next-hop pointers from the source. A hop succeeds only if the current node
    has a table entry for the destination and is still physically linked to the
    entry's next hop. Transmission completes within the tick.
    """
    assert pkt.src != pkt.dst, "source and destination must differ"
    pkt = copy.deepcopy(pkt)
    ttl = len(graph.nodes)

    node = pkt.src
    hops = 0
    while node != pkt.dst:
        if hops >= ttl:
            return Dropped(pkt, at=node, reason=DropReason.TTL_EXCEEDED)

        table = tables.get(node)
        entry = table.route(pkt.dst) if table else None
        if entry is None:
            return Dropped(pkt, at=node, reason=DropReason.NO_ROUTE)
        if not graph.linked(node, entry.next_hop):
            return Dropped(pkt, at=node, reason=DropReason.LINK_DOWN)

        node = entry.next_hop
        pkt.hop_trace.append(node)
        hops += 1

    pkt.delivered_tick = pkt.created_tick if now is None else now
    return Delivered(pkt)
