"""
Run metrics, accumulated tick by tick.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from relaynet.mesh.types import Delivered, RelayOutcome
from relaynet.nsb.tasks import Vec2


@dataclass
class Metrics:
    ticks: int = 0
    packets_sent: int = 0
    packets_delivered: int = 0
    packets_dropped: int = 0
    drops_by_reason: Dict[str, int] = field(default_factory=dict)
    connected_ticks: int = 0
    # [start, end) tick ranges without an agent -> base route
    disconnected_intervals: List[List[int]] = field(default_factory=list)
    topology_change_ticks: List[int] = field(default_factory=list)
    waypoint_times: List[float] = field(default_factory=list)
    completion_time: Optional[float] = None
    max_route_distance: float = 0.0
    max_euclidean_distance: float = 0.0
    free_to_on_path: int = 0
    max_on_path: int = 0
    # None when the world has no walls
    min_wall_distance: Optional[float] = None
    max_displacement: float = 0.0
    event_counts: Dict[str, int] = field(default_factory=dict)

    @property
    def delivery_ratio(self) -> float:
        if self.packets_sent == 0:
            return 1.0
        return self.packets_delivered / self.packets_sent


def polyline_progress(p: Vec2, polyline: np.ndarray) -> float:
    """Arc length from the first vertex to the projection of p on the nearest segment."""
    a, b = polyline[:-1], polyline[1:]
    ab = b - a
    lengths = np.linalg.norm(ab, axis=-1)
    safe = np.where(lengths > 0, lengths**2, 1.0)
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / safe, 0.0, 1.0)
    q = a + t[:, None] * ab
    i = int(np.argmin(np.linalg.norm(q - p, axis=-1)))
    return float(lengths[:i].sum() + t[i] * lengths[i])


class MetricsTracker:
    """
    `route_polyline` runs from the base along the outbound waypoints; the agent's
    progress along it is the route distance reached.
    """

    def __init__(self, route_polyline: Sequence[Vec2], base_position: Vec2):
        self.metrics = Metrics()
        self._polyline = np.asarray(route_polyline, dtype=float)
        self._base = np.asarray(base_position, dtype=float)
        self._disconnected_since: Optional[int] = None

    def record_packet(self, outcome: RelayOutcome) -> None:
        m = self.metrics
        m.packets_sent += 1
        if isinstance(outcome, Delivered):
            m.packets_delivered += 1
        else:
            m.packets_dropped += 1
            reason = outcome.reason.value
            m.drops_by_reason[reason] = m.drops_by_reason.get(reason, 0) + 1

    def record_tick(
        self,
        tick: int,
        connected: bool,
        topology_changed: bool,
        agent_pos: Vec2,
        on_path: int,
        free_to_on_path: int,
        min_wall_distance: float,
        max_displacement: float,
    ) -> None:
        m = self.metrics
        m.ticks = tick + 1
        if connected:
            m.connected_ticks += 1
            if self._disconnected_since is not None:
                m.disconnected_intervals.append([self._disconnected_since, tick])
                self._disconnected_since = None
        elif self._disconnected_since is None:
            self._disconnected_since = tick
        if topology_changed:
            m.topology_change_ticks.append(tick)

        if len(self._polyline) > 1:
            m.max_route_distance = max(
                m.max_route_distance, polyline_progress(agent_pos, self._polyline)
            )
        m.max_euclidean_distance = max(
            m.max_euclidean_distance, float(np.linalg.norm(agent_pos - self._base))
        )
        m.free_to_on_path += free_to_on_path
        m.max_on_path = max(m.max_on_path, on_path)
        if np.isfinite(min_wall_distance):
            m.min_wall_distance = (
                min_wall_distance
                if m.min_wall_distance is None
                else min(m.min_wall_distance, min_wall_distance)
            )
        m.max_displacement = max(m.max_displacement, max_displacement)

    def record_waypoint(self, time: float) -> None:
        self.metrics.waypoint_times.append(time)

    def record_completion(self, time: float) -> None:
        if self.metrics.completion_time is None:
            self.metrics.completion_time = time

    def finish(self, event_counts: Dict[str, int]) -> Metrics:
        m = self.metrics
        if self._disconnected_since is not None:
            m.disconnected_intervals.append([self._disconnected_since, m.ticks])
            self._disconnected_since = None
        m.event_counts = dict(event_counts)
        assert m.packets_sent == m.packets_delivered + m.packets_dropped
        return m
