"""
Scenario files: YAML documents checked against a tree of dataclass configs.

Omitted fields take the dataclass defaults, unknown keys and wrong types are
rejected. See `relaynet/cli/README.md` for the full grammar.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import yaml
from omegaconf import MISSING, OmegaConf
from omegaconf.errors import OmegaConfBaseException
from relaynet.behavior.types import BehaviorConfig
from relaynet.mesh.types import RadioConfig
from relaynet.nsb.core import DAMPING, SINGULAR_THRESHOLD
from relaynet.nsb.tasks import EPS_POS, Gains
from relaynet.sim.world import ObstacleConfig

CONFIGS_DIR = Path(__file__).parent / "configs"


class ScenarioParseError(ValueError):
    pass


class ScenarioValidationError(ValueError):
    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


@dataclass
class WorldConfig:
    # each wall is [x1, y1, x2, y2]
    walls: List[List[float]] = field(default_factory=list)
    # [xmin, ymin, xmax, ymax]
    bounds: List[float] = MISSING


@dataclass
class AgentConfig:
    start: List[float] = MISSING
    heading: float = 0.0
    waypoints: List[List[float]] = MISSING
    # come back through the same waypoints to the start position
    return_to_start: bool = False


@dataclass
class ControlConfig:
    v_max: float = 0.2
    omega_max: float = 2.0
    k_omega: float = 2.0
    damping: float = DAMPING
    singular_threshold: float = SINGULAR_THRESHOLD
    eps_pos: float = EPS_POS
    gains: Gains = field(default_factory=Gains)


@dataclass
class Scenario:
    world: WorldConfig = MISSING
    base: List[float] = MISSING
    agent: AgentConfig = MISSING
    # each support robot is [x, y] or [x, y, heading]
    supports: List[List[float]] = field(default_factory=list)
    # support robots, numbered from 1 in file order, pinned in place
    supports_frozen: List[int] = field(default_factory=list)
    radio: RadioConfig = field(default_factory=RadioConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    behavior: BehaviorConfig = field(default_factory=BehaviorConfig)
    obstacles: ObstacleConfig = field(default_factory=ObstacleConfig)
    dt: float = 0.1
    duration: float = 700.0
    seed: int = 0
    # std dev of the position noise robots see, 0 disables it
    noise_sigma: float = 0.0
    stop_on_completion: bool = False


def _yaml_error(e: yaml.YAMLError) -> ScenarioParseError:
    mark = getattr(e, "problem_mark", None)
    where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
    return ScenarioParseError(f"{where}{getattr(e, 'problem', None) or e}")


def parse_scenario(text: str) -> Scenario:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise _yaml_error(e) from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioParseError("a scenario must be a mapping at the top level")

    try:
        cfg = OmegaConf.merge(OmegaConf.structured(Scenario), data)
        scenario = OmegaConf.to_object(cfg)
    except OmegaConfBaseException as e:
        key = getattr(e, "full_key", None)
        msg = str(e).splitlines()[0]
        raise ScenarioParseError(f"{key}: {msg}" if key else msg) from e

    validate_scenario(scenario)
    return scenario


def _point(path: str, xs: List[float], sizes=(2,)) -> None:
    if len(xs) not in sizes:
        raise ScenarioValidationError(path, f"expected {' or '.join(map(str, sizes))} numbers, got {len(xs)}")


def _positive(path: str, x: float) -> None:
    if not x > 0:
        raise ScenarioValidationError(path, f"must be positive, got {x}")


def _non_negative(path: str, x: float) -> None:
    if not x >= 0:
        raise ScenarioValidationError(path, f"must be non-negative, got {x}")


def _inside(path: str, p: List[float], bounds: List[float]) -> None:
    xmin, ymin, xmax, ymax = bounds
    if not (xmin <= p[0] <= xmax and ymin <= p[1] <= ymax):
        raise ScenarioValidationError(path, f"{p[:2]} is outside world.bounds {bounds}")


def validate_scenario(s: Scenario) -> None:
    _point("world.bounds", s.world.bounds, (4,))
    xmin, ymin, xmax, ymax = s.world.bounds
    if not (xmin < xmax and ymin < ymax):
        raise ScenarioValidationError("world.bounds", f"empty rectangle {s.world.bounds}")
    for i, w in enumerate(s.world.walls):
        _point(f"world.walls[{i}]", w, (4,))
        if w[0] == w[2] and w[1] == w[3]:
            raise ScenarioValidationError(f"world.walls[{i}]", "wall has zero length")

    _point("base", s.base)
    _inside("base", s.base, s.world.bounds)
    _point("agent.start", s.agent.start)
    _inside("agent.start", s.agent.start, s.world.bounds)
    if not s.agent.waypoints:
        raise ScenarioValidationError("agent.waypoints", "at least one waypoint is required")
    for i, w in enumerate(s.agent.waypoints):
        _point(f"agent.waypoints[{i}]", w)
    for i, p in enumerate(s.supports):
        _point(f"supports[{i}]", p, (2, 3))
        _inside(f"supports[{i}]", p, s.world.bounds)
    for i in s.supports_frozen:
        if not 1 <= i <= len(s.supports):
            raise ScenarioValidationError(
                "supports_frozen", f"{i} is not a support robot (1..{len(s.supports)})"
            )

    _positive("radio.r_max", s.radio.r_max)
    _non_negative("radio.tau_route", s.radio.tau_route)
    _positive("control.v_max", s.control.v_max)
    _positive("control.omega_max", s.control.omega_max)
    _positive("control.k_omega", s.control.k_omega)
    _non_negative("control.damping", s.control.damping)
    _non_negative("control.singular_threshold", s.control.singular_threshold)
    _positive("control.eps_pos", s.control.eps_pos)
    for name in ("distance", "goal", "equal_distance", "obstacle"):
        _positive(f"control.gains.{name}", getattr(s.control.gains, name))

    b = s.behavior
    if not 0 < b.alpha_stretch <= 1:
        raise ScenarioValidationError(
            "behavior.alpha_stretch", f"must be in (0, 1], got {b.alpha_stretch}"
        )
    _non_negative("behavior.t_backtrack", b.t_backtrack)
    _non_negative("behavior.help_cooldown", b.help_cooldown)
    _positive("behavior.help_timeout", b.help_timeout)
    _positive("behavior.capture_radius", b.capture_radius)

    _positive("obstacles.d_threshold", s.obstacles.d_threshold)
    _positive("obstacles.d_safe", s.obstacles.d_safe)
    _positive("obstacles.lrf_range", s.obstacles.lrf_range)

    _positive("dt", s.dt)
    _non_negative("duration", s.duration)
    _non_negative("noise_sigma", s.noise_sigma)


def scenario_to_yaml(s: Scenario) -> str:
    return OmegaConf.to_yaml(OmegaConf.structured(s))


def scenario_to_dict(s: Scenario) -> dict:
    return OmegaConf.to_container(OmegaConf.structured(s), enum_to_str=True)


def load_scenario(name_or_path: Union[str, Path]) -> Scenario:
    """A bundled scenario name (e.g. `corridor`) or a path to a YAML file."""
    path = Path(name_or_path).expanduser()
    if not path.exists():
        bundled = CONFIGS_DIR / f"{name_or_path}.yaml"
        if not bundled.exists():
            raise ScenarioParseError(
                f"{name_or_path} is neither a file nor a bundled scenario "
                f"({', '.join(bundled_scenarios())})"
            )
        path = bundled
    return parse_scenario(path.read_text(encoding="utf-8"))


def bundled_scenarios() -> List[str]:
    return sorted(p.stem for p in CONFIGS_DIR.glob("*.yaml"))


def with_overrides(
    s: Scenario, seed: Optional[int] = None, duration: Optional[float] = None
) -> Scenario:
    cfg = OmegaConf.structured(s)
    if seed is not None:
        cfg.seed = seed
    if duration is not None:
        cfg.duration = duration
    out = OmegaConf.to_object(cfg)
    validate_scenario(out)
    return out
