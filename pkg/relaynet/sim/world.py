"""
Segment-wall environment and the simulated laser range finder feeding the obstacle
avoidance task.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from relaynet.mesh.graph import as_wall_array
from relaynet.nsb.tasks import Vec2


@dataclass
class ObstacleConfig:
    enabled: bool = True
    # activation distance
    d_threshold: float = 1.0
    # desired distance of the avoidance task, robot radius included
    d_safe: float = 0.5
    lrf_range: float = 4.0


@dataclass(eq=False)
class World:
    walls: np.ndarray  # (k, 2, 2)
    bounds: Tuple[float, float, float, float]  # xmin, ymin, xmax, ymax

    def __post_init__(self):
        self.walls = as_wall_array(self.walls)
        assert np.all(np.isfinite(self.walls)), "wall coordinates must be finite"
        lengths = np.linalg.norm(self.walls[:, 1] - self.walls[:, 0], axis=-1)
        assert np.all(lengths > 0), "walls must have positive length"
        xmin, ymin, xmax, ymax = self.bounds
        assert xmin < xmax and ymin < ymax, f"empty bounds {self.bounds}"

    def contains(self, p: Vec2) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return bool(xmin <= p[0] <= xmax and ymin <= p[1] <= ymax)


@dataclass(frozen=True, eq=False)
class ScanHit:
    point: Vec2
    distance: float


def closest_wall_points(p: Vec2, walls: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Closest point of every wall to p, and the distances to them."""
    a, b = walls[:, 0], walls[:, 1]
    ab = b - a
    t = np.einsum("ij,ij->i", p - a, ab) / np.einsum("ij,ij->i", ab, ab)
    q = a + np.clip(t, 0.0, 1.0)[:, None] * ab
    return q, np.linalg.norm(q - p, axis=-1)


def wall_distance(p: Vec2, world: World) -> float:
    if len(world.walls) == 0:
        return np.inf
    _, d = closest_wall_points(np.asarray(p, dtype=float), world.walls)
    return float(d.min())


def _nearest(points: np.ndarray, dists: np.ndarray, max_range: float) -> Optional[ScanHit]:
    if len(points) == 0:
        return None
    i = int(np.argmin(dists))
    if dists[i] > max_range:
        return None
    return ScanHit(points[i].copy(), float(dists[i]))


def scan_split(
    position: Vec2,
    world: World,
    neighbors: Sequence[Vec2],
    max_range: float,
) -> Tuple[Optional[ScanHit], Optional[ScanHit]]:
    """Nearest wall point and nearest neighbouring robot within `max_range`."""
    assert max_range > 0
    p = np.asarray(position, dtype=float)
    wall = robot = None
    if len(world.walls):
        q, d = closest_wall_points(p, world.walls)
        wall = _nearest(q, d, max_range)
    if len(neighbors):
        q = np.stack([np.asarray(n, dtype=float) for n in neighbors])
        robot = _nearest(q, np.linalg.norm(q - p, axis=-1), max_range)
    return wall, robot


def lrf_scan(
    position: Vec2,
    world: World,
    neighbors: Sequence[Vec2],
    max_range: float,
) -> Optional[Vec2]:
    """
    Nearest obstacle point within `max_range`: the closest point of any wall, or a
    neighbouring robot treated as a point. Walls win exact ties.
    """
    hits = [h for h in scan_split(position, world, neighbors, max_range) if h is not None]
    if not hits:
        return None
    return min(hits, key=lambda h: h.distance).point


def obstacle_active(p: Vec2, v_cmd: Vec2, p_o: Vec2, d_threshold: float) -> bool:
    """Close to the obstacle and moving toward it."""
    d = np.asarray(p_o, dtype=float) - np.asarray(p, dtype=float)
    return bool(np.hypot(d[0], d[1]) < d_threshold and float(v_cmd @ d) > 0)
