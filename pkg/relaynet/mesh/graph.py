"""
Radio connectivity and one-hop position gossip.
"""
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
from relaynet.mesh.types import (
    Beacon,
    LinkGraph,
    NeighborReport,
    NeighborSnapshot,
    NodeId,
)
from relaynet.nsb.tasks import Vec2
from scipy.spatial.distance import cdist

Segment = np.ndarray  # (2, 2): start, end


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def segment_blocked(p: Vec2, q: Vec2, walls: np.ndarray) -> bool:
    """
    True if the open segment p-q properly crosses any wall. `walls` is (k, 2, 2).
    Touching a wall end point does not count.
    """
    if len(walls) == 0:
        return False
    a, b = walls[:, 0], walls[:, 1]
    r = q - p
    s = b - a
    denom = _cross(r, s)
    parallel = np.abs(denom) < 1e-12
    safe = np.where(parallel, 1.0, denom)
    t = _cross(a - p, s) / safe
    u = _cross(a - p, r) / safe
    hit = (~parallel) & (t > 0) & (t < 1) & (u > 0) & (u < 1)
    return bool(np.any(hit))


def as_wall_array(walls: Sequence) -> np.ndarray:
    if len(walls) == 0:
        return np.zeros((0, 2, 2))
    arr = np.asarray(walls, dtype=float)
    return arr.reshape(-1, 2, 2)


def build_link_graph(
    positions: Mapping[NodeId, Vec2],
    r_max: float,
    walls: Sequence = (),
    los_enabled: bool = False,
) -> LinkGraph:
    assert r_max > 0, f"r_max must be positive, got {r_max}"
    nodes = tuple(sorted(positions))
    if not nodes:
        return LinkGraph((), np.zeros((0, 0), dtype=bool))

    pts = np.stack([np.asarray(positions[u], dtype=float) for u in nodes])
    adj = cdist(pts, pts) <= r_max
    np.fill_diagonal(adj, False)

    if los_enabled:
        wall_arr = as_wall_array(walls)
        iu, ju = np.nonzero(np.triu(adj, k=1))
        for i, j in zip(iu, ju):
            if segment_blocked(pts[i], pts[j], wall_arr):
                adj[i, j] = adj[j, i] = False

    return LinkGraph(nodes, adj)


def gossip_positions(
    positions: Mapping[NodeId, Vec2],
    graph: LinkGraph,
    now: int = 0,
    beacons: Optional[Mapping[NodeId, Beacon]] = None,
) -> Dict[NodeId, NeighborSnapshot]:
    """Every node hears the current position (and beacon) of exactly its one-hop neighbours."""
    beacons = beacons or {}
    snapshots = {}
    for u in graph.nodes:
        reports = {
            v: NeighborReport(
                node=v,
                position=np.array(positions[v], dtype=float),
                tick=now,
                beacon=beacons.get(v, Beacon()),
            )
            for v in graph.neighbors(u)
        }
        snapshots[u] = NeighborSnapshot(owner=u, reports=reports)
    return snapshots
