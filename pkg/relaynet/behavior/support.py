"""
Support robot behaviour: path membership, the prioritized task list for each state
and help request handling.

Everything here is a function of the robot's own pose, its routing table, the
one-hop neighbour snapshot, received help requests and `KnownConstants`. Nothing
reads another robot's state directly.
"""
import logging
from dataclasses import replace
from typing import Dict, List, Optional, Sequence

import numpy as np
from relaynet.behavior.types import (
    BehaviorConfig,
    Decision,
    FreeStrategy,
    HelpRequest,
    KnownConstants,
    MissingNeighborPosition,
    seconds_to_ticks,
    SupportMode,
    SupportState,
)
from relaynet.mesh.routing import path_members
from relaynet.mesh.types import NeighborSnapshot, NodeId, RoutingTable
from relaynet.nsb.tasks import Gains, TaskKind, TaskRequest, Vec2

logger = logging.getLogger(__name__)


def remember(mode: SupportMode, snapshot: NeighborSnapshot) -> SupportMode:
    if not snapshot.reports:
        return mode
    known = dict(mode.known)
    for node, report in snapshot.reports.items():
        known[node] = report.position
    return replace(mode, known=known)


def resolve_position(
    node: NodeId, mode: SupportMode, snapshot: NeighborSnapshot, consts: KnownConstants
) -> Vec2:
    """Heard this tick, else the base constant, else the last position heard."""
    pos = snapshot.position(node)
    if pos is not None:
        return pos
    if node == consts.base:
        return consts.base_position
    if node in mode.known:
        return mode.known[node]
    raise MissingNeighborPosition(node)


def route_alive(table: RoutingTable, snapshot: NeighborSnapshot, dest: NodeId) -> bool:
    """The table has an entry for `dest` and its first hop is still heard."""
    hop = table.next_hop(dest)
    return hop is not None and hop in snapshot


_NO_HELP = dict(
    help_target=None,
    help_requester=None,
    help_started=None,
    help_strained=None,
    help_depth=0,
    help_refreshed=None,
)


def _free(mode: SupportMode) -> SupportMode:
    return replace(
        mode, state=SupportState.FREE, predecessor=None, successor=None, **_NO_HELP
    )


def _predecessor_pos(mode, pred, snapshot, consts) -> Optional[Vec2]:
    try:
        return resolve_position(pred, mode, snapshot, consts)
    except MissingNeighborPosition:
        return mode.last_known_predecessor_pos


def classify(
    robot: NodeId,
    mode: SupportMode,
    table: RoutingTable,
    path: Optional[List[NodeId]],
    snapshot: NeighborSnapshot,
    now: int,
    consts: KnownConstants,
    config: BehaviorConfig,
    dt: float,
) -> SupportMode:
    """
    Next FSM state. Precedence is OnPath, then LostPredecessor, then Helping, then
    Free. `path` runs agent first, base last.
    """
    mode = remember(mode, snapshot)

    if path is not None and robot in path_members(path):
        i = path.index(robot)
        pred, succ = path[i + 1], path[i - 1]
        return replace(
            mode,
            state=SupportState.ON_PATH,
            predecessor=pred,
            successor=succ,
            last_known_predecessor_pos=_predecessor_pos(mode, pred, snapshot, consts),
            **_NO_HELP,
        )

    if mode.state == SupportState.ON_PATH:
        pred, succ = mode.predecessor, mode.successor
        if path is None and pred in snapshot and succ in snapshot:
            # hold the chain while the route is being repaired elsewhere
            return replace(
                mode,
                last_known_predecessor_pos=_predecessor_pos(mode, pred, snapshot, consts),
            )
        if (
            pred not in snapshot
            and not route_alive(table, snapshot, consts.base)
            and mode.last_known_predecessor_pos is not None
        ):
            logger.debug(f"tick {now}: robot {robot} lost predecessor {pred}")
            return replace(
                mode,
                state=SupportState.LOST_PREDECESSOR,
                predecessor=None,
                successor=None,
            )
        return _free(mode)

    if mode.state == SupportState.LOST_PREDECESSOR:
        if route_alive(table, snapshot, consts.base):
            return _free(mode)
        return mode

    if mode.state == SupportState.HELPING:
        # helping lasts until the robot is on the path or the requester goes quiet
        since = mode.help_refreshed if mode.help_refreshed is not None else mode.help_started
        if now - since >= seconds_to_ticks(config.help_timeout, dt):
            logger.debug(f"tick {now}: robot {robot} gives up helping {mode.help_requester}")
            return _free(mode)
        return mode

    return _free(mode)


def _pick_helper(
    own_pos: Vec2,
    snapshot: NeighborSnapshot,
    exclude: Sequence[NodeId],
    asked: Dict[NodeId, int],
) -> Optional[NodeId]:
    """
    A one-hop support robot not on the path: never asked before, then longest since
    asked, then nearest, then lowest id.
    """
    candidates = [
        (asked.get(r.node, -1), float(np.linalg.norm(r.position - own_pos)), r.node)
        for r in snapshot.reports.values()
        if not r.beacon.on_path and r.node not in exclude
    ]
    if not candidates:
        return None
    return min(candidates)[2]


def tasks_on_path(
    robot: NodeId,
    mode: SupportMode,
    own_pos: Vec2,
    snapshot: NeighborSnapshot,
    now: int,
    consts: KnownConstants,
    config: BehaviorConfig,
    gains: Gains,
    dt: float,
    depth: int = 1,
) -> Decision:
    """
    Equal distance from predecessor and successor. When either link is stretched
    beyond alpha_stretch * r_max, ask an off-path neighbour to take the midpoint of
    the longer one, at most once per help cooldown. While the strain lasts the
    request is repeated, each time to the neighbour asked least recently, so helpers
    already on the way are refreshed and new ones recruited in turn. `depth` is this
    robot's hop count to the base.
    """
    assert mode.state == SupportState.ON_PATH
    fallbacks = []
    refs = []
    for node in (mode.predecessor, mode.successor):
        if node not in snapshot and node != consts.base:
            fallbacks.append(MissingNeighborPosition.__name__)
        refs.append(resolve_position(node, mode, snapshot, consts))
    pred_pos, succ_pos = refs

    tasks = [TaskRequest.equal_distance(pred_pos, succ_pos, gains.equal_distance)]

    help_req = None
    d_pred = float(np.linalg.norm(own_pos - pred_pos))
    d_succ = float(np.linalg.norm(own_pos - succ_pos))
    cooled = mode.last_help_tick is None or now - mode.last_help_tick >= seconds_to_ticks(
        config.help_cooldown, dt
    )
    if max(d_pred, d_succ) > config.alpha_stretch * consts.r_max and cooled:
        if d_pred >= d_succ:
            strained, strained_pos = mode.predecessor, pred_pos
        else:
            strained, strained_pos = mode.successor, succ_pos
        exclude = (consts.base, consts.agent, robot, mode.predecessor, mode.successor)
        helper = _pick_helper(own_pos, snapshot, exclude, mode.asked)
        if helper is not None:
            help_req = HelpRequest(
                requester=robot,
                helper=helper,
                midpoint=0.5 * (own_pos + strained_pos),
                issue_tick=now,
                strained=strained,
                depth=depth,
            )
            mode = replace(mode, last_help_tick=now, asked={**mode.asked, helper: now})
            logger.debug(f"tick {now}: robot {robot} asks {helper} for help with {strained}")

    return Decision(tasks=tasks, mode=mode, help=help_req, fallbacks=fallbacks)


def tasks_lost(mode: SupportMode, gains: Gains) -> Decision:
    assert mode.state == SupportState.LOST_PREDECESSOR
    goal = TaskRequest.move_to_goal(mode.last_known_predecessor_pos, gains.goal)
    return Decision(tasks=[goal], mode=mode)


def _first_path_node(
    mode: SupportMode, snapshot: NeighborSnapshot, consts: KnownConstants
) -> SupportMode:
    """Learn the route's first node from beacons: on the path, predecessor is the base."""
    heard = [
        r.node
        for r in snapshot.reports.values()
        if r.beacon.on_path and r.beacon.predecessor == consts.base
    ]
    if heard:
        return replace(mode, first_node=min(heard))
    return mode


def tasks_free(
    robot: NodeId,
    mode: SupportMode,
    table: RoutingTable,
    snapshot: NeighborSnapshot,
    consts: KnownConstants,
    config: BehaviorConfig,
    gains: Gains,
) -> Decision:
    assert mode.state == SupportState.FREE
    if not route_alive(table, snapshot, consts.base):
        return Decision(tasks=[], mode=mode, fallbacks=["Disconnected"])

    if config.strategy == FreeStrategy.A:
        mode = _first_path_node(mode, snapshot, consts)
        if mode.first_node is None or mode.first_node == robot:
            return Decision(tasks=[], mode=mode, fallbacks=["NoFirstPathNode"])
        p1 = consts.base_position
        ref = mode.first_node
    else:
        hop_base = table.next_hop(consts.base)
        ref = table.next_hop(consts.agent)
        if ref is None or ref == hop_base:
            return Decision(tasks=[], mode=mode, fallbacks=["NoAgentRoute"])
        p1 = resolve_position(hop_base, mode, snapshot, consts)

    try:
        p2 = resolve_position(ref, mode, snapshot, consts)
    except MissingNeighborPosition:
        return Decision(tasks=[], mode=mode, fallbacks=[MissingNeighborPosition.__name__])
    return Decision(
        tasks=[TaskRequest.equal_distance(p1, p2, gains.equal_distance)], mode=mode
    )


def _adopt(mode: SupportMode, req: HelpRequest, now: int) -> SupportMode:
    return replace(
        mode,
        state=SupportState.HELPING,
        help_target=np.array(req.midpoint, dtype=float),
        help_requester=req.requester,
        help_started=now,
        help_strained=req.strained,
        help_depth=req.depth,
        help_refreshed=now,
    )


def accept_help(
    robot: NodeId, requests: Sequence[HelpRequest], mode: SupportMode, now: int
) -> SupportMode:
    """
    Free robots adopt the oldest request addressed to them, lowest requester first.
    A helping robot switches to a request from deeper along the route, and otherwise
    takes a repeat of the request it is serving as a refresh.
    """
    if mode.state not in (SupportState.FREE, SupportState.HELPING):
        return mode
    mine = [r for r in requests if r.helper == robot]
    if not mine:
        return mode
    if mode.state == SupportState.FREE:
        req = min(mine, key=lambda r: (r.issue_tick, r.requester))
        logger.debug(f"tick {now}: robot {robot} helps {req.requester}")
        return _adopt(mode, req, now)

    deeper = [r for r in mine if r.depth > mode.help_depth]
    if deeper:
        req = min(deeper, key=lambda r: (-r.depth, r.issue_tick, r.requester))
        logger.debug(
            f"tick {now}: robot {robot} leaves {mode.help_requester} to help {req.requester}"
        )
        return _adopt(mode, req, now)
    repeats = [
        r
        for r in mine
        if r.requester == mode.help_requester and r.strained == mode.help_strained
    ]
    if not repeats:
        return mode
    req = max(repeats, key=lambda r: r.issue_tick)
    return replace(
        mode, help_target=np.array(req.midpoint, dtype=float), help_refreshed=now
    )


def help_tasks(
    mode: SupportMode, snapshot: NeighborSnapshot, gains: Gains
) -> Decision:
    """
    Head for the middle of the strained link. While both of its ends are heard the
    goal follows them; otherwise it is the midpoint of the latest request.
    """
    assert mode.state == SupportState.HELPING
    ends = [snapshot.position(n) for n in (mode.help_requester, mode.help_strained)]
    if all(p is not None for p in ends):
        mode = replace(mode, help_target=0.5 * (ends[0] + ends[1]))
    return Decision(
        tasks=[TaskRequest.move_to_goal(mode.help_target, gains.goal)], mode=mode
    )


def with_obstacles(
    tasks: List[TaskRequest], obstacles: Sequence[TaskRequest]
) -> List[TaskRequest]:
    """Active obstacle avoidance tasks go first, in the order given (walls before robots)."""
    if not obstacles or not tasks:
        return list(tasks)
    assert all(o.kind == TaskKind.OBSTACLE_AVOID for o in obstacles)
    return list(obstacles) + [t for t in tasks if t.kind != TaskKind.OBSTACLE_AVOID]
