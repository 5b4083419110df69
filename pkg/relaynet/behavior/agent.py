"""
Waypoint policy of the roaming agent: navigate while a route to the base exists,
halt when it is lost, and after `t_backtrack` head back to where its first hop
toward the base was last heard.
"""
import logging
from dataclasses import replace
from typing import Sequence

import numpy as np
from relaynet.behavior.support import route_alive
from relaynet.behavior.types import (
    AgentMode,
    AgentState,
    BehaviorConfig,
    Decision,
    KnownConstants,
    seconds_to_ticks,
)
from relaynet.mesh.types import NeighborSnapshot, RoutingTable
from relaynet.nsb.tasks import Gains, TaskRequest, Vec2

logger = logging.getLogger(__name__)


def _first_hop_pos(mode, table, snapshot, consts):
    hop = table.next_hop(consts.base)
    if hop == consts.base:
        return consts.base_position
    pos = snapshot.position(hop) if hop is not None else None
    return pos if pos is not None else mode.first_hop_pos


def agent_step(
    mode: AgentMode,
    own_pos: Vec2,
    table: RoutingTable,
    snapshot: NeighborSnapshot,
    waypoints: Sequence[Vec2],
    now: int,
    consts: KnownConstants,
    config: BehaviorConfig,
    gains: Gains,
    dt: float,
    delivered_last: bool = True,
) -> Decision:
    """
    `delivered_last` is the outcome of the agent's previous data packet; together
    with its table and snapshot it is all the agent knows about connectivity.
    """
    assert len(waypoints) > 0, "agent needs at least one waypoint"
    if mode.completed:
        return Decision(tasks=[], mode=mode)

    connected = delivered_last and route_alive(table, snapshot, consts.base)
    if connected:
        if mode.state != AgentState.NAVIGATE:
            logger.debug(f"tick {now}: agent route restored, resuming")
        idx = mode.waypoint_index
        if float(np.linalg.norm(own_pos - waypoints[idx])) <= config.capture_radius:
            idx += 1
        mode = replace(
            mode,
            state=AgentState.NAVIGATE,
            halt_started=None,
            first_hop_pos=_first_hop_pos(mode, table, snapshot, consts),
        )
        if idx == len(waypoints):
            logger.info(f"tick {now}: agent reached its last waypoint")
            return Decision(
                tasks=[], mode=replace(mode, completed=True, completed_tick=now)
            )
        goal = TaskRequest.move_to_goal(waypoints[idx], gains.goal)
        return Decision(tasks=[goal], mode=replace(mode, waypoint_index=idx))

    if mode.state == AgentState.NAVIGATE:
        logger.debug(f"tick {now}: agent lost its route to the base, halting")
        mode = replace(mode, state=AgentState.HALT, halt_started=now)
    if mode.state == AgentState.HALT and now - mode.halt_started >= seconds_to_ticks(
        config.t_backtrack, dt
    ):
        logger.debug(f"tick {now}: agent backtracking")
        mode = replace(mode, state=AgentState.BACKTRACK)

    if mode.state == AgentState.BACKTRACK and mode.first_hop_pos is not None:
        goal = TaskRequest.move_to_goal(mode.first_hop_pos, gains.goal)
        return Decision(tasks=[goal], mode=mode)
    return Decision(tasks=[], mode=mode)
