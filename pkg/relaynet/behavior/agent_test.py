import numpy as np
from relaynet.mesh.types import NeighborReport, NeighborSnapshot, RouteEntry, RoutingTable
from relaynet.nsb.tasks import Gains, TaskKind, vec2

from .agent import agent_step
from .types import AgentMode, AgentState, BehaviorConfig, KnownConstants

BASE, RELAY, AGENT = 0, 1, 2
DT = 0.1
CONSTS = KnownConstants(base=BASE, agent=AGENT, base_position=vec2(0, 0), r_max=20.0)
CONFIG = BehaviorConfig(t_backtrack=10.0)
GAINS = Gains()
WAYPOINTS = [vec2(20, 0), vec2(30, 0), vec2(40, 0)]

CONNECTED_TABLE = RoutingTable(
    owner=AGENT, entries={BASE: RouteEntry(RELAY, 2), RELAY: RouteEntry(RELAY, 1)}
)
EMPTY_TABLE = RoutingTable(owner=AGENT)


def _snap(relay_pos=None):
    reports = {}
    if relay_pos is not None:
        reports[RELAY] = NeighborReport(RELAY, np.asarray(relay_pos, dtype=float), 0)
    return NeighborSnapshot(owner=AGENT, reports=reports)


def _step(mode, pos, now, table=CONNECTED_TABLE, snap=None, delivered=True):
    return agent_step(
        mode,
        np.asarray(pos, dtype=float),
        table,
        snap if snap is not None else _snap((10, 0)),
        WAYPOINTS,
        now,
        CONSTS,
        CONFIG,
        GAINS,
        DT,
        delivered_last=delivered,
    )


def test_navigate_toward_current_waypoint():
    d = _step(AgentMode(), (5, 0), 0)
    assert d.mode.state == AgentState.NAVIGATE
    assert [t.kind for t in d.tasks] == [TaskKind.MOVE_TO_GOAL]
    np.testing.assert_array_equal(d.tasks[0].p1, WAYPOINTS[0])
    np.testing.assert_array_equal(d.mode.first_hop_pos, [10, 0])


def test_advance_within_capture_radius():
    d = _step(AgentMode(), (19.8, 0.1), 0)
    assert d.mode.waypoint_index == 1
    np.testing.assert_array_equal(d.tasks[0].p1, WAYPOINTS[1])

    d = _step(AgentMode(), (19.6, 0), 0)
    assert d.mode.waypoint_index == 0


def test_route_lost_halts_immediately():
    mode = _step(AgentMode(), (15, 0), 0).mode
    d = _step(mode, (15, 0), 7, delivered=False)
    assert d.mode.state == AgentState.HALT
    assert d.mode.halt_started == 7
    assert d.tasks == []

    # the first hop dropping out of the snapshot counts as a lost route too
    d = _step(mode, (15, 0), 7, snap=_snap())
    assert d.mode.state == AgentState.HALT


def test_backtrack_after_t_backtrack():
    mode = _step(AgentMode(), (15, 0), 0, snap=_snap((4, 1))).mode
    for now in range(1, 100):
        mode = _step(mode, (15, 0), now, table=EMPTY_TABLE, snap=_snap()).mode
        assert mode.state == AgentState.HALT
    d = _step(mode, (15, 0), 101, table=EMPTY_TABLE, snap=_snap())
    assert d.mode.state == AgentState.BACKTRACK
    np.testing.assert_array_equal(d.tasks[0].p1, [4, 1])


def test_backtrack_exactly_t_backtrack_after_halt():
    mode = _step(AgentMode(), (15, 0), 0).mode
    mode = _step(mode, (15, 0), 50, delivered=False).mode
    assert mode.halt_started == 50
    assert _step(mode, (15, 0), 149, delivered=False).mode.state == AgentState.HALT
    assert _step(mode, (15, 0), 150, delivered=False).mode.state == AgentState.BACKTRACK


def test_resume_same_waypoint_index():
    mode = AgentMode(waypoint_index=1)
    mode = _step(mode, (29.9, 0), 0, delivered=False).mode
    # even at the waypoint, a halted agent does not advance
    assert mode.waypoint_index == 1
    mode = _step(mode, (29.9, 0), 200, delivered=False).mode
    assert mode.state == AgentState.BACKTRACK
    assert mode.waypoint_index == 1

    d = _step(mode, (25, 0), 300)
    assert d.mode.state == AgentState.NAVIGATE
    assert d.mode.waypoint_index == 1
    assert d.mode.halt_started is None


def test_completion():
    d = _step(AgentMode(waypoint_index=2), (40, 0.1), 12)
    assert d.mode.completed
    assert d.mode.completed_tick == 12
    assert d.mode.waypoint_index == 2
    assert d.tasks == []
    assert _step(d.mode, (40, 0.1), 13).mode.completed_tick == 12
