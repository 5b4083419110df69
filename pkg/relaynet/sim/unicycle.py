"""
Low-level control of a differential-drive robot, abstracted as a unicycle: the
planar velocity asked for by the behavioural layer becomes an advancing speed and a
turn rate, both saturated.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from relaynet.nsb.tasks import Vec2


def wrap_angle(theta: float) -> float:
    """Into (-pi, pi]."""
    w = float(np.remainder(theta + np.pi, 2 * np.pi) - np.pi)
    return np.pi if w <= -np.pi else w


@dataclass(frozen=True, eq=False)
class UnicyclePose:
    position: Vec2
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "heading", wrap_angle(self.heading))


@dataclass
class UnicycleLimits:
    v_max: float = 0.2
    omega_max: float = 2.0
    k_omega: float = 2.0


def unicycle_track(
    pose: UnicyclePose, v_des: Vec2, limits: UnicycleLimits
) -> Tuple[float, float]:
    speed = float(np.hypot(v_des[0], v_des[1]))
    if speed <= 1e-12:
        return 0.0, 0.0
    err = wrap_angle(np.arctan2(v_des[1], v_des[0]) - pose.heading)
    omega = float(np.clip(limits.k_omega * err, -limits.omega_max, limits.omega_max))
    u = float(np.clip(speed * max(0.0, np.cos(err)), 0.0, limits.v_max))
    return u, omega


def integrate(pose: UnicyclePose, u: float, omega: float, dt: float) -> UnicyclePose:
    """Forward Euler; exact for straight motion."""
    assert dt > 0
    th = pose.heading
    step = u * dt * np.array([np.cos(th), np.sin(th)])
    return UnicyclePose(pose.position + step, th + omega * dt)
