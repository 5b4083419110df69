import numpy as np

from .relay import relay_packet
from .routing import compute_tables
from .types import Delivered, DropReason, Dropped, LinkGraph, Packet, RouteEntry, RoutingTable


def _chain(n):
    return LinkGraph.from_edges(range(n), [(u, u + 1) for u in range(n - 1)])


def test_five_node_line():
    g = _chain(5)
    out = relay_packet(Packet(seq=0, src=4, dst=0, created_tick=7), compute_tables(g), g)
    assert isinstance(out, Delivered)
    assert out.hop_trace == [4, 3, 2, 1, 0]
    assert len(out.hop_trace) - 1 == 4
    assert out.packet.delivered_tick == 7


def test_direct_link():
    g = _chain(2)
    out = relay_packet(Packet(seq=0, src=1, dst=0, created_tick=0), compute_tables(g), g, now=3)
    assert isinstance(out, Delivered)
    assert out.hop_trace == [1, 0]
    assert out.packet.delivered_tick == 3


def test_input_packet_untouched():
    g = _chain(3)
    pkt = Packet(seq=0, src=2, dst=0, created_tick=0)
    relay_packet(pkt, compute_tables(g), g)
    assert pkt.hop_trace == [2]
    assert pkt.delivered_tick is None


def test_stale_table_link_down():
    g = _chain(4)
    tables = compute_tables(g)
    broken = LinkGraph.from_edges(range(4), [(0, 1), (2, 3)])
    out = relay_packet(Packet(seq=1, src=3, dst=0, created_tick=0), tables, broken)
    assert isinstance(out, Dropped)
    assert out.reason == DropReason.LINK_DOWN
    assert out.at == 2
    assert out.hop_trace == [3, 2]


def test_no_route():
    g = LinkGraph.from_edges(range(3), [(0, 1)])
    out = relay_packet(Packet(seq=1, src=2, dst=0, created_tick=0), compute_tables(g), g)
    assert isinstance(out, Dropped)
    assert out.reason == DropReason.NO_ROUTE
    assert out.at == 2
    assert out.hop_trace == [2]


def test_routing_loop_exceeds_ttl():
    g = LinkGraph.from_edges(range(3), [(0, 1), (1, 2)])
    # hand-made tables that bounce between 1 and 2 forever
    tables = {
        1: RoutingTable(owner=1, entries={0: RouteEntry(next_hop=2, hop_count=1)}),
        2: RoutingTable(owner=2, entries={0: RouteEntry(next_hop=1, hop_count=1)}),
    }
    out = relay_packet(Packet(seq=0, src=2, dst=0, created_tick=0), tables, g)
    assert isinstance(out, Dropped)
    assert out.reason == DropReason.TTL_EXCEEDED
    assert len(out.hop_trace) == 4


def test_delivery_when_connected():
    rng = np.random.default_rng(2)
    for _ in range(300):
        n = int(rng.integers(2, 9))
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
        g = LinkGraph.from_edges(range(n), edges)
        tables = compute_tables(g)
        for src in range(1, n):
            out = relay_packet(Packet(seq=0, src=src, dst=0, created_tick=0), tables, g)
            if tables[src].has_route(0):
                assert isinstance(out, Delivered)
                assert len(out.hop_trace) - 1 == tables[src].route(0).hop_count
            else:
                assert isinstance(out, Dropped)
                assert out.reason == DropReason.NO_ROUTE
