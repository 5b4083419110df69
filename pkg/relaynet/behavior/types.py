from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Union

from relaynet.mesh.types import NodeId
from relaynet.nsb.tasks import TaskRequest, Vec2


class FreeStrategy(Enum):
    # equal distance from the base and the first node of the route
    A = "A"
    # equal distance from the first hops toward the base and toward the agent
    B = "B"


@dataclass
class BehaviorConfig:
    alpha_stretch: float = 0.8
    t_backtrack: float = 10.0
    help_cooldown: float = 5.0
    help_timeout: float = 60.0
    capture_radius: float = 0.3
    strategy: FreeStrategy = FreeStrategy.A


class MissingNeighborPosition(KeyError):
    """A node the behaviour needs was neither heard this tick nor remembered."""


class SupportState(Enum):
    ON_PATH = "OnPath"
    FREE = "Free"
    LOST_PREDECESSOR = "LostPredecessor"
    HELPING = "Helping"


@dataclass(frozen=True, eq=False)
class SupportMode:
    """
    FSM state of one support robot, plus the little it remembers between ticks.
    `known` holds the last position heard from each node; it is only ever replaced,
    never mutated in place.
    """

    state: SupportState = SupportState.FREE
    predecessor: Optional[NodeId] = None
    successor: Optional[NodeId] = None
    last_known_predecessor_pos: Optional[Vec2] = None
    help_target: Optional[Vec2] = None
    help_requester: Optional[NodeId] = None
    help_started: Optional[int] = None
    # link being helped: the requester's neighbour, and the requester's hops to the base
    help_strained: Optional[NodeId] = None
    help_depth: int = 0
    help_refreshed: Optional[int] = None
    last_help_tick: Optional[int] = None
    # tick each neighbour was last asked for help
    asked: Dict[NodeId, int] = field(default_factory=dict)
    first_node: Optional[NodeId] = None
    known: Dict[NodeId, Vec2] = field(default_factory=dict)

    def __post_init__(self):
        if self.state == SupportState.ON_PATH:
            assert self.predecessor is not None and self.successor is not None
        if self.state == SupportState.LOST_PREDECESSOR:
            assert self.last_known_predecessor_pos is not None
        if self.state == SupportState.HELPING:
            assert self.help_target is not None and self.help_started is not None


class AgentState(Enum):
    NAVIGATE = "Navigate"
    HALT = "Halt"
    BACKTRACK = "Backtrack"


@dataclass(frozen=True, eq=False)
class AgentMode:
    state: AgentState = AgentState.NAVIGATE
    waypoint_index: int = 0
    halt_started: Optional[int] = None
    first_hop_pos: Optional[Vec2] = None
    completed: bool = False
    completed_tick: Optional[int] = None

    def __post_init__(self):
        assert self.waypoint_index >= 0
        if self.state == AgentState.HALT:
            assert self.halt_started is not None


@dataclass(frozen=True, eq=False)
class HelpRequest:
    """
    Sent by a strained path robot to one off-path neighbour. `midpoint` lies halfway
    between the requester and `strained`, the neighbour it is losing, at `issue_tick`.
    `depth` is the requester's hop count to the base.
    """

    requester: NodeId
    helper: NodeId
    midpoint: Vec2
    issue_tick: int
    strained: Optional[NodeId] = None
    depth: int = 1


def seconds_to_ticks(seconds: float, dt: float) -> int:
    assert dt > 0
    return int(round(seconds / dt))


@dataclass(frozen=True, eq=False)
class KnownConstants:
    """Scenario constants every robot may use without hearing them over the radio."""

    base: NodeId
    agent: NodeId
    base_position: Vec2
    r_max: float


@dataclass(eq=False)
class Decision:
    """
    Output of one behaviour step: tasks highest priority first, the next mode, an
    optional help request to send, and the names of any fallbacks taken.
    """

    tasks: List[TaskRequest]
    mode: Union[SupportMode, AgentMode]
    help: Optional[HelpRequest] = None
    fallbacks: List[str] = field(default_factory=list)
