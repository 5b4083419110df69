"""
Fixed-step simulation of the base, the support robots and the agent.

Each tick runs, in order: link graph, position gossip, routing, path membership and
classification, help request delivery, behaviour, velocity composition (with the
obstacle task injected when triggered), unicycle motion, the agent's data packet
and the metrics update. Robots are always visited in NodeId order.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from relaynet.behavior.agent import agent_step
from relaynet.behavior.support import (
    accept_help,
    classify,
    help_tasks,
    tasks_free,
    tasks_lost,
    tasks_on_path,
    with_obstacles,
)
from relaynet.behavior.types import (
    AgentMode,
    Decision,
    HelpRequest,
    KnownConstants,
    MissingNeighborPosition,
    seconds_to_ticks,
    SupportMode,
    SupportState,
)
from relaynet.cli.scenario import Scenario
from relaynet.mesh.graph import build_link_graph, gossip_positions
from relaynet.mesh.relay import relay_packet
from relaynet.mesh.routing import current_path, path_members, RoutingState, tick_routing
from relaynet.mesh.types import (
    Beacon,
    Delivered,
    NodeId,
    Packet,
    RelayOutcome,
    Role,
)
from relaynet.nsb.core import compose, EmptyTaskList, SingularTask
from relaynet.nsb.tasks import DegeneratePosition, eval_task, TaskRequest, Vec2
from relaynet.sim.events import Event, EventLevel
from relaynet.sim.metrics import MetricsTracker
from relaynet.sim.unicycle import integrate, unicycle_track, UnicycleLimits, UnicyclePose
from relaynet.sim.world import obstacle_active, scan_split, wall_distance, World

logger = logging.getLogger(__name__)

STATION = "Station"


@dataclass(frozen=True)
class Roster:
    """Base is 0, support robots 1..n in file order, the agent n + 1."""

    n_supports: int

    @property
    def base(self) -> NodeId:
        return 0

    @property
    def agent(self) -> NodeId:
        return self.n_supports + 1

    @property
    def supports(self) -> Tuple[NodeId, ...]:
        return tuple(range(1, self.n_supports + 1))

    @property
    def nodes(self) -> Tuple[NodeId, ...]:
        return tuple(range(self.n_supports + 2))

    def role(self, u: NodeId) -> Role:
        if u == self.base:
            return Role.BASE
        if u == self.agent:
            return Role.AGENT
        return Role.SUPPORT

    def names(self) -> Dict[NodeId, str]:
        out = {u: f"s{u}" for u in self.supports}
        out[self.base] = "base"
        out[self.agent] = "agent"
        return out


@dataclass(eq=False)
class SimSetup:
    """Everything the tick loop needs, derived once from a Scenario."""

    scenario: Scenario
    world: World
    roster: Roster
    consts: KnownConstants
    start_poses: Dict[NodeId, UnicyclePose]
    waypoints: List[Vec2]
    route_polyline: np.ndarray
    frozen: FrozenSet[NodeId]
    limits: UnicycleLimits
    n_ticks: int

    @property
    def dt(self) -> float:
        return self.scenario.dt

    @staticmethod
    def from_scenario(s: Scenario) -> "SimSetup":
        roster = Roster(n_supports=len(s.supports))
        base_pos = np.array(s.base, dtype=float)
        start = np.array(s.agent.start, dtype=float)
        outbound = [np.array(w, dtype=float) for w in s.agent.waypoints]
        waypoints = list(outbound)
        if s.agent.return_to_start:
            waypoints += [w.copy() for w in reversed(outbound[:-1])] + [start.copy()]

        poses = {roster.base: UnicyclePose(base_pos, 0.0)}
        for u, p in zip(roster.supports, s.supports):
            poses[u] = UnicyclePose(np.array(p[:2], dtype=float), p[2] if len(p) > 2 else 0.0)
        poses[roster.agent] = UnicyclePose(start, s.agent.heading)

        return SimSetup(
            scenario=s,
            world=World(
                walls=[[w[:2], w[2:]] for w in s.world.walls], bounds=tuple(s.world.bounds)
            ),
            roster=roster,
            consts=KnownConstants(
                base=roster.base,
                agent=roster.agent,
                base_position=base_pos,
                r_max=s.radio.r_max,
            ),
            start_poses=poses,
            waypoints=waypoints,
            route_polyline=np.stack([base_pos, start] + outbound),
            frozen=frozenset(s.supports_frozen),
            limits=UnicycleLimits(
                v_max=s.control.v_max,
                omega_max=s.control.omega_max,
                k_omega=s.control.k_omega,
            ),
            n_ticks=int(round(s.duration / s.dt)),
        )


@dataclass(eq=False)
class NodeRecord:
    node: NodeId
    role: Role
    pose: UnicyclePose
    state: str
    on_path: bool
    predecessor: Optional[NodeId] = None
    successor: Optional[NodeId] = None
    tasks: Tuple[str, ...] = ()


@dataclass(eq=False)
class TickRecord:
    tick: int
    time: float
    nodes: List[NodeRecord]
    packet: RelayOutcome


@dataclass(eq=False)
class SimState:
    tick: int
    time: float
    poses: Dict[NodeId, UnicyclePose]
    support_modes: Dict[NodeId, SupportMode]
    agent_mode: AgentMode
    routing: Optional[RoutingState]
    beacons: Dict[NodeId, Beacon]
    help_inbox: List[HelpRequest]
    delivered_last: bool
    next_seq: int
    rng: np.random.Generator
    tracker: MetricsTracker
    events: List[Event] = field(default_factory=list)
    record: Optional[TickRecord] = None


def init_state(setup: SimSetup) -> SimState:
    return SimState(
        tick=0,
        time=0.0,
        poses=dict(setup.start_poses),
        support_modes={u: SupportMode() for u in setup.roster.supports},
        agent_mode=AgentMode(),
        routing=None,
        beacons={},
        help_inbox=[],
        delivered_last=True,
        next_seq=0,
        rng=np.random.default_rng(setup.scenario.seed),
        tracker=MetricsTracker(setup.route_polyline, setup.consts.base_position),
    )


def finished(state: SimState, setup: SimSetup) -> bool:
    if state.tick >= setup.n_ticks:
        return True
    return setup.scenario.stop_on_completion and state.agent_mode.completed


def _perceived_positions(state: SimState, setup: SimSetup) -> Dict[NodeId, Vec2]:
    sigma = setup.scenario.noise_sigma
    out = {}
    for u in setup.roster.nodes:
        p = state.poses[u].position
        if sigma > 0 and u != setup.roster.base:
            p = p + state.rng.normal(0.0, sigma, 2)
        out[u] = p
    return out


def _velocity(
    tasks: List[TaskRequest],
    p: Vec2,
    setup: SimSetup,
    node: NodeId,
    now: int,
    events: List[Event],
) -> Vec2:
    control = setup.scenario.control
    evals = []
    for t in tasks:
        try:
            evals.append(eval_task(t, p, control.eps_pos))
        except DegeneratePosition as e:
            events.append(Event(EventLevel.WARN, now, node, "DegeneratePosition", str(e)))
    if not evals:
        return np.zeros(2)
    try:
        return compose(
            evals,
            damping=control.damping,
            v_max=control.v_max,
            threshold=control.singular_threshold,
        )
    except (SingularTask, EmptyTaskList) as e:
        events.append(Event(EventLevel.WARN, now, node, type(e).__name__, str(e)))
        return np.zeros(2)


def _obstacle_tasks(
    p: Vec2, commands: Sequence[Vec2], neighbors: List[Vec2], setup: SimSetup
) -> List[TaskRequest]:
    """
    Avoidance tasks for the nearest wall point and the nearest robot, wall first. Each
    is active while within d_threshold of it and any of `commands` points toward it.
    """
    obs = setup.scenario.obstacles
    if not obs.enabled:
        return []
    gain = setup.scenario.control.gains.obstacle
    return [
        TaskRequest.obstacle_avoid(hit.point, obs.d_safe, gain)
        for hit in scan_split(p, setup.world, neighbors, obs.lrf_range)
        if hit is not None
        and any(obstacle_active(p, v, hit.point, obs.d_threshold) for v in commands)
    ]


def avoiding_velocity(
    tasks: List[TaskRequest],
    p: Vec2,
    neighbors: List[Vec2],
    setup: SimSetup,
    node: NodeId,
    now: int,
    events: List[Event],
) -> Tuple[List[TaskRequest], Vec2]:
    """
    Compose the nominal tasks, then add obstacle tasks until none more activates.
    Steering away from one obstacle can head toward the other, so every command
    tried so far counts toward activation.
    """
    v = _velocity(tasks, p, setup, node, now, events)
    commands = [v]
    active: List[TaskRequest] = []
    out = list(tasks)
    while True:
        found = _obstacle_tasks(p, commands, neighbors, setup)
        if len(found) == len(active):
            return out, v
        active = found
        out = with_obstacles(tasks, active)
        v = _velocity(out, p, setup, node, now, events)
        commands.append(v)


def _support_decision(
    u: NodeId, mode: SupportMode, p: Vec2, tables, snap, now: int, setup: SimSetup
) -> Decision:
    s = setup.scenario
    if mode.state == SupportState.ON_PATH:
        entry = tables[u].route(setup.consts.base)
        return tasks_on_path(
            u,
            mode,
            p,
            snap,
            now,
            setup.consts,
            s.behavior,
            s.control.gains,
            s.dt,
            depth=entry.hop_count if entry else 1,
        )
    if mode.state == SupportState.LOST_PREDECESSOR:
        return tasks_lost(mode, s.control.gains)
    if mode.state == SupportState.HELPING:
        return help_tasks(mode, snap, s.control.gains)
    return tasks_free(
        u, mode, tables[u], snap, setup.consts, s.behavior, s.control.gains
    )


def step(state: SimState, setup: SimSetup) -> SimState:
    s = setup.scenario
    roster = setup.roster
    now = state.tick
    events: List[Event] = []

    true_pos = {u: state.poses[u].position for u in roster.nodes}
    seen_pos = _perceived_positions(state, setup)

    # (1) - (3) connectivity, gossip and routing
    graph = build_link_graph(
        true_pos, s.radio.r_max, setup.world.walls, s.radio.los_enabled
    )
    snaps = gossip_positions(seen_pos, graph, now=now, beacons=state.beacons)
    if state.routing is None:
        routing = RoutingState.converged(graph, now)
        topology_changed = False
    else:
        routing = tick_routing(state.routing, graph, now, s.radio.tau_route, s.dt)
        topology_changed = graph != state.routing.graph
        if topology_changed:
            events.append(
                Event(EventLevel.INFO, now, None, "TopologyChange", f"{sorted(graph.edges)}")
            )
    tables = routing.tables

    # (4) path membership
    path = current_path(tables, graph, roster.agent, roster.base)
    members = set(path_members(path))
    modes = {}
    joined = 0
    for u in roster.supports:
        prev = state.support_modes[u]
        mode = classify(
            u, prev, tables[u], path, snaps[u], now, setup.consts, s.behavior, s.dt
        )
        if mode.state == SupportState.ON_PATH and prev.state != SupportState.ON_PATH:
            joined += 1
        modes[u] = mode

    # (5) help requests issued last tick reach one-hop helpers now
    cooldown = seconds_to_ticks(s.behavior.help_cooldown, s.dt)
    inbox = [
        r
        for r in state.help_inbox
        if now - r.issue_tick <= cooldown and graph.linked(r.requester, r.helper)
    ]
    for u in roster.supports:
        mine = [r for r in inbox if r.helper == u]
        mode = accept_help(u, mine, modes[u], now)
        if mode.state == SupportState.HELPING and mode.help_refreshed == now:
            # adopted or refreshed: the requests from that requester are used up
            inbox = [r for r in inbox if r.requester != mode.help_requester or r.helper != u]
        modes[u] = mode

    # (6) - (7) behaviour and velocity composition
    decisions: Dict[NodeId, Decision] = {}
    velocities: Dict[NodeId, Vec2] = {}
    new_help: List[HelpRequest] = []
    for u in roster.supports + (roster.agent,):
        p = seen_pos[u]
        try:
            if u == roster.agent:
                d = agent_step(
                    state.agent_mode,
                    p,
                    tables[u],
                    snaps[u],
                    setup.waypoints,
                    now,
                    setup.consts,
                    s.behavior,
                    s.control.gains,
                    s.dt,
                    delivered_last=state.delivered_last,
                )
            else:
                d = _support_decision(u, modes[u], p, tables, snaps[u], now, setup)
        except MissingNeighborPosition as e:
            events.append(
                Event(EventLevel.WARN, now, u, "MissingNeighborPosition", f"node {e}")
            )
            mode = state.agent_mode if u == roster.agent else modes[u]
            d = Decision(tasks=[], mode=mode)
        for fb in d.fallbacks:
            events.append(Event(EventLevel.INFO, now, u, fb, ""))
        if d.help is not None:
            new_help.append(d.help)

        if u in setup.frozen:
            velocities[u] = np.zeros(2)
        else:
            neighbors = [r.position for _, r in sorted(snaps[u].reports.items())]
            d.tasks, velocities[u] = avoiding_velocity(
                d.tasks, p, neighbors, setup, u, now, events
            )
        decisions[u] = d

    agent_mode = decisions[roster.agent].mode
    for u in roster.supports:
        modes[u] = decisions[u].mode

    # (8) motion, all robots at once
    poses = dict(state.poses)
    max_disp = 0.0
    for u, v in velocities.items():
        pose = state.poses[u]
        u_adv, omega = unicycle_track(pose, v, setup.limits)
        poses[u] = integrate(pose, u_adv, omega, s.dt)
        max_disp = max(max_disp, float(np.linalg.norm(poses[u].position - pose.position)))
        if setup.world.contains(pose.position) and not setup.world.contains(poses[u].position):
            events.append(
                Event(EventLevel.WARN, now, u, "OutOfBounds", f"{poses[u].position.tolist()}")
            )

    # (9) the agent's data packet for this tick
    pkt = Packet(seq=state.next_seq, src=roster.agent, dst=roster.base, created_tick=now)
    outcome = relay_packet(pkt, tables, graph, now=now)
    delivered = isinstance(outcome, Delivered)
    if not delivered:
        events.append(
            Event(
                EventLevel.WARN,
                now,
                outcome.at,
                "PacketDropped",
                f"seq {pkt.seq}: {outcome.reason.value}",
            )
        )

    # (10) metrics
    state.events.extend(events)
    tracker = state.tracker
    tracker.record_packet(outcome)
    if agent_mode.waypoint_index > state.agent_mode.waypoint_index or (
        agent_mode.completed and not state.agent_mode.completed
    ):
        tracker.record_waypoint(now * s.dt)
    if agent_mode.completed:
        tracker.record_completion(agent_mode.completed_tick * s.dt)
    tracker.record_tick(
        now,
        connected=path is not None,
        topology_changed=topology_changed,
        agent_pos=poses[roster.agent].position,
        on_path=len(members),
        free_to_on_path=joined,
        min_wall_distance=min(
            wall_distance(poses[u].position, setup.world)
            for u in roster.supports + (roster.agent,)
        ),
        max_displacement=max_disp,
    )

    if logger.isEnabledFor(logging.DEBUG):
        for e in events:
            logger.debug(f"tick {e.tick} node {e.node} {e.type}: {e.description}")

    record = TickRecord(
        tick=now,
        time=now * s.dt,
        nodes=_node_records(state, setup, modes, agent_mode, members, decisions),
        packet=outcome,
    )
    return replace(
        state,
        tick=now + 1,
        time=(now + 1) * s.dt,
        poses=poses,
        support_modes=modes,
        agent_mode=agent_mode,
        routing=routing,
        beacons=_beacons(setup, modes, tables),
        help_inbox=inbox + new_help,
        delivered_last=delivered,
        next_seq=state.next_seq + 1,
        record=record,
    )


def _beacons(setup: SimSetup, modes: Dict[NodeId, SupportMode], tables) -> Dict[NodeId, Beacon]:
    roster = setup.roster
    out = {
        u: Beacon(on_path=m.state == SupportState.ON_PATH, predecessor=m.predecessor)
        for u, m in modes.items()
    }
    out[roster.agent] = Beacon(
        on_path=True, predecessor=tables[roster.agent].next_hop(roster.base)
    )
    return out


def _node_records(state, setup, modes, agent_mode, members, decisions) -> List[NodeRecord]:
    roster = setup.roster
    records = []
    for u in roster.nodes:
        role = roster.role(u)
        pose = state.poses[u]
        if role == Role.BASE:
            records.append(NodeRecord(u, role, pose, STATION, False))
            continue
        d = decisions[u]
        kinds = tuple(t.kind.value for t in d.tasks)
        if role == Role.AGENT:
            records.append(NodeRecord(u, role, pose, agent_mode.state.value, False, tasks=kinds))
            continue
        m = modes[u]
        records.append(
            NodeRecord(
                u,
                role,
                pose,
                m.state.value,
                u in members,
                predecessor=m.predecessor,
                successor=m.successor,
                tasks=kinds,
            )
        )
    return records
