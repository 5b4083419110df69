import numpy as np
import pytest
from relaynet.nsb.tasks import vec2

from .world import lrf_scan, obstacle_active, scan_split, wall_distance, World

BOUNDS = (-10.0, -10.0, 10.0, 10.0)


def _world(*walls):
    return World(walls=[[w[:2], w[2:]] for w in walls], bounds=BOUNDS)


def test_perpendicular_foot():
    world = _world((-5, 0, 5, 0))
    p_o = lrf_scan(vec2(0, 1), world, [], max_range=4.0)
    np.testing.assert_allclose(p_o, [0, 0], atol=1e-12)
    assert wall_distance(vec2(0, 1), world) == pytest.approx(1.0)


def test_segment_endpoint_is_nearest():
    world = _world((-5, 0, 5, 0))
    np.testing.assert_allclose(lrf_scan(vec2(7, 1), world, [], 4.0), [5, 0])


def test_nothing_in_range():
    world = _world((-5, 0, 5, 0))
    assert lrf_scan(vec2(0, 5), world, [], max_range=4.0) is None
    assert lrf_scan(vec2(0, 5), _world(), [], max_range=4.0) is None
    assert wall_distance(vec2(0, 5), _world()) == np.inf


def test_neighbor_is_an_obstacle():
    world = _world((-5, 0, 5, 0))
    p_o = lrf_scan(vec2(0, 2), world, [vec2(0.5, 2.0)], max_range=4.0)
    np.testing.assert_allclose(p_o, [0.5, 2.0])


def test_wall_wins_tie_with_neighbor():
    world = _world((-5, 0, 5, 0))
    p_o = lrf_scan(vec2(0, 1), world, [vec2(0, 2)], max_range=4.0)
    np.testing.assert_allclose(p_o, [0, 0])


def test_nearest_of_two_walls_matches_dense_sampling():
    rng = np.random.default_rng(3)
    for _ in range(20):
        walls = rng.uniform(-5, 5, size=(2, 4))
        if np.any(np.linalg.norm(walls[:, 2:] - walls[:, :2], axis=-1) < 0.5):
            continue
        world = _world(*walls)
        p = rng.uniform(-5, 5, size=2)

        samples = []
        for w in walls:
            a, b = w[:2], w[2:]
            n = int(np.ceil(np.linalg.norm(b - a) / 1e-3)) + 1
            t = np.linspace(0.0, 1.0, n)[:, None]
            samples.append(a + t * (b - a))
        samples = np.concatenate(samples)
        brute = np.linalg.norm(samples - p, axis=-1).min()

        p_o = lrf_scan(p, world, [], max_range=100.0)
        assert abs(np.linalg.norm(p_o - p) - brute) < 1e-3


def test_obstacle_active_rules():
    p, p_o = vec2(0, 0), vec2(0.5, 0)
    assert obstacle_active(p, vec2(0.1, 0), p_o, d_threshold=1.0)
    assert not obstacle_active(p, vec2(-0.1, 0), p_o, d_threshold=1.0)
    # sideways is not toward
    assert not obstacle_active(p, vec2(0, 0.1), p_o, d_threshold=1.0)
    assert not obstacle_active(p, vec2(0.1, 0), vec2(2, 0), d_threshold=1.0)


def test_obstacle_active_at_threshold_is_false():
    assert not obstacle_active(vec2(0, 0), vec2(1, 0), vec2(1, 0), d_threshold=1.0)


def test_degenerate_walls_rejected():
    with pytest.raises(AssertionError):
        _world((1, 1, 1, 1))


def test_scan_split_reports_wall_and_robot():
    world = _world((-5, 0, 5, 0))
    wall, robot = scan_split(vec2(0, 0.3), world, [vec2(0, 0.55), vec2(3, 3)], 4.0)
    np.testing.assert_allclose(wall.point, [0, 0])
    assert wall.distance == pytest.approx(0.3)
    np.testing.assert_allclose(robot.point, [0, 0.55])
    assert robot.distance == pytest.approx(0.25)
    # the single nearest point is the robot
    np.testing.assert_allclose(lrf_scan(vec2(0, 0.3), world, [vec2(0, 0.55)], 4.0), [0, 0.55])

    wall, robot = scan_split(vec2(0, 5), world, [vec2(0, 9.5)], 4.0)
    assert wall is None and robot is None
