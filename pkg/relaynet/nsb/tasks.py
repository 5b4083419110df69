"""
Elementary task functions for the null-space based behavioural controller.

Every task is a function sigma = f(p) of the planar robot position with an analytic
Jacobian J = df/dp. A `TaskRequest` names the behaviour and its reference points,
`eval_task` turns it into the value / Jacobian / desired triple at a given position.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

Vec2 = np.ndarray  # shape (2,), meters
Mat = np.ndarray

EPS_POS = 1e-6


def vec2(x: float, y: float) -> Vec2:
    return np.array([x, y], dtype=float)


class DegeneratePosition(ValueError):
    """The robot sits on the reference point of a distance-type task."""


class TaskKind(Enum):
    DISTANCE_FROM_POINT = "DistanceFromPoint"
    EQUAL_DISTANCE = "EqualDistance"
    MOVE_TO_GOAL = "MoveToGoal"
    OBSTACLE_AVOID = "ObstacleAvoid"


@dataclass
class Gains:
    """
    Per task-kind scalar gains. The equal-distance task regulates a squared
    distance, hence the much smaller default.
    """

    distance: float = 0.5
    goal: float = 0.5
    equal_distance: float = 0.05
    obstacle: float = 0.5


@dataclass(frozen=True, eq=False)
class TaskRequest:
    kind: TaskKind
    p1: Vec2
    p2: Optional[Vec2] = None
    desired_distance: float = 0.0
    gain: float = 1.0

    def __post_init__(self):
        assert self.desired_distance >= 0, "desired_distance must be non-negative"
        assert self.gain > 0, "gain must be strictly positive"
        if self.kind == TaskKind.EQUAL_DISTANCE:
            assert self.p2 is not None, "EqualDistance needs two reference points"

    @staticmethod
    def distance_from_point(p1: Vec2, distance: float, gain: float) -> "TaskRequest":
        return TaskRequest(
            TaskKind.DISTANCE_FROM_POINT,
            np.asarray(p1, dtype=float),
            desired_distance=distance,
            gain=gain,
        )

    @staticmethod
    def equal_distance(p1: Vec2, p2: Vec2, gain: float) -> "TaskRequest":
        return TaskRequest(
            TaskKind.EQUAL_DISTANCE,
            np.asarray(p1, dtype=float),
            np.asarray(p2, dtype=float),
            gain=gain,
        )

    @staticmethod
    def move_to_goal(goal: Vec2, gain: float) -> "TaskRequest":
        return TaskRequest(TaskKind.MOVE_TO_GOAL, np.asarray(goal, dtype=float), gain=gain)

    @staticmethod
    def obstacle_avoid(p_o: Vec2, d_safe: float, gain: float) -> "TaskRequest":
        return TaskRequest(
            TaskKind.OBSTACLE_AVOID,
            np.asarray(p_o, dtype=float),
            desired_distance=d_safe,
            gain=gain,
        )


@dataclass(eq=False)
class TaskEval:
    value: np.ndarray  # (m,)
    jacobian: Mat  # (m, 2)
    desired_value: np.ndarray  # (m,)
    gain: Mat  # (m, m), diagonal
    desired_rate: Optional[np.ndarray] = None  # (m,), zero when None
    kind: Optional[TaskKind] = None

    def __post_init__(self):
        self.value = np.atleast_1d(np.asarray(self.value, dtype=float))
        self.jacobian = np.atleast_2d(np.asarray(self.jacobian, dtype=float))
        self.desired_value = np.atleast_1d(np.asarray(self.desired_value, dtype=float))
        self.gain = np.atleast_2d(np.asarray(self.gain, dtype=float))
        if self.desired_rate is None:
            self.desired_rate = np.zeros_like(self.value)
        m = len(self.value)
        assert self.jacobian.shape == (m, 2), f"bad jacobian shape {self.jacobian.shape}"
        assert self.gain.shape == (m, m), f"bad gain shape {self.gain.shape}"
        assert np.all(np.diag(self.gain) > 0), "gain diagonal must be positive"

    @property
    def error(self) -> np.ndarray:
        return self.desired_value - self.value


def _eval_distance(req: TaskRequest, p: Vec2, eps_pos: float) -> TaskEval:
    d = p - req.p1
    n = float(np.hypot(d[0], d[1]))
    if n <= eps_pos:
        raise DegeneratePosition(
            f"{req.kind.value}: position {p.tolist()} within {eps_pos} m of "
            f"reference {req.p1.tolist()}"
        )
    return TaskEval(
        value=[n],
        jacobian=(d / n)[None, :],
        desired_value=[req.desired_distance],
        gain=[[req.gain]],
        kind=req.kind,
    )


def _eval_equal_distance(req: TaskRequest, p: Vec2) -> TaskEval:
    d1 = p - req.p1
    d2 = p - req.p2
    sigma = float(d1 @ d1 - d2 @ d2)
    return TaskEval(
        value=[sigma],
        jacobian=(2.0 * (req.p2 - req.p1))[None, :],
        desired_value=[0.0],
        gain=[[req.gain]],
        kind=req.kind,
    )


def _eval_goal(req: TaskRequest, p: Vec2) -> TaskEval:
    return TaskEval(
        value=p.copy(),
        jacobian=np.eye(2),
        desired_value=req.p1.copy(),
        gain=req.gain * np.eye(2),
        kind=req.kind,
    )


def eval_task(req: TaskRequest, p: Vec2, eps_pos: float = EPS_POS) -> TaskEval:
    p = np.asarray(p, dtype=float)
    assert np.all(np.isfinite(p)), f"non-finite position {p}"

    if req.kind in (TaskKind.DISTANCE_FROM_POINT, TaskKind.OBSTACLE_AVOID):
        return _eval_distance(req, p, eps_pos)
    if req.kind == TaskKind.EQUAL_DISTANCE:
        return _eval_equal_distance(req, p)
    if req.kind == TaskKind.MOVE_TO_GOAL:
        return _eval_goal(req, p)
    raise AssertionError(f"unknown task kind {req.kind}")
