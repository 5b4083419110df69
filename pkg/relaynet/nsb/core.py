"""
Prioritized velocity composition: damped pseudo-inverse, null-space projection and
the composition of task velocities, highest priority first.

Matrices are at most a handful of rows by 2 columns, so the Gram matrix JJ^T is
inverted in closed form.
"""
from typing import Sequence

import numpy as np
from relaynet.nsb.tasks import Mat, TaskEval, Vec2

DAMPING = 1e-3
SINGULAR_THRESHOLD = 1e-6
SINGULAR_TOL = 1e-12


class SingularTask(RuntimeError):
    """JJ^T is not invertible and no damping was allowed."""


class EmptyTaskList(ValueError):
    pass


def _min_eig(gram: Mat) -> float:
    if gram.shape == (1, 1):
        return float(gram[0, 0])
    a, b, d = gram[0, 0], gram[0, 1], gram[1, 1]
    half_tr = 0.5 * (a + d)
    return float(half_tr - np.sqrt(max(0.25 * (a - d) ** 2 + b * b, 0.0)))


def _inv_small(gram: Mat) -> Mat:
    if gram.shape == (1, 1):
        return np.array([[1.0 / gram[0, 0]]])
    a, b, c, d = gram[0, 0], gram[0, 1], gram[1, 0], gram[1, 1]
    det = a * d - b * c
    return np.array([[d, -b], [-c, a]]) / det


def damped_pinv(J: Mat, damping: float = 0.0) -> Mat:
    """
    J^T (J J^T + damping^2 I)^-1 for a 1x2 or 2x2 Jacobian.

    Raises SingularTask when damping is zero and J J^T is singular.
    """
    J = np.atleast_2d(np.asarray(J, dtype=float))
    m = J.shape[0]
    assert m in (1, 2) and J.shape[1] == 2, f"unsupported jacobian shape {J.shape}"
    assert damping >= 0
    assert np.all(np.isfinite(J)), "non-finite jacobian"

    gram = J @ J.T
    if damping == 0.0:
        if _min_eig(gram) <= SINGULAR_TOL:
            raise SingularTask(f"singular task jacobian {J.tolist()}")
    else:
        gram = gram + damping**2 * np.eye(m)
    return J.T @ _inv_small(gram)


def robust_pinv(
    J: Mat, damping: float = DAMPING, threshold: float = SINGULAR_THRESHOLD
) -> Mat:
    """Undamped pseudo-inverse, switching to damped least squares near singularities."""
    J = np.atleast_2d(np.asarray(J, dtype=float))
    if damping == 0.0 or _min_eig(J @ J.T) >= threshold:
        return damped_pinv(J, 0.0)
    return damped_pinv(J, damping)


def _row_basis(J: Mat) -> Mat:
    """
    An equivalent matrix with at most two independent rows spanning the row space
    of J, so J^+ J is the same projector.
    """
    w, V = np.linalg.eigh(J.T @ J)
    keep = w > SINGULAR_TOL * max(1.0, float(w.max()))
    if not np.any(keep):
        return np.zeros((1, 2))
    return np.sqrt(w[keep])[:, None] * V[:, keep].T


def null_projector(
    J_stack: Mat, damping: float = DAMPING, threshold: float = SINGULAR_THRESHOLD
) -> Mat:
    J = np.atleast_2d(np.asarray(J_stack, dtype=float))
    R = _row_basis(J)
    return np.eye(2) - robust_pinv(R, damping, threshold) @ R


def task_velocity(
    task: TaskEval, damping: float = DAMPING, threshold: float = SINGULAR_THRESHOLD
) -> Vec2:
    pinv = robust_pinv(task.jacobian, damping, threshold)
    return pinv @ (task.desired_rate + task.gain @ task.error)


def saturate(v: Vec2, v_max: float) -> Vec2:
    n = float(np.hypot(v[0], v[1]))
    if n > v_max:
        return v * (v_max / n)
    return v


def compose(
    tasks: Sequence[TaskEval],
    damping: float = DAMPING,
    v_max: float = np.inf,
    threshold: float = SINGULAR_THRESHOLD,
) -> Vec2:
    """
    v_f = v_1 + N_{1,1} v_2 + N_{1,2} v_3 + ..., where N_{1,k} projects onto the null
    space of the stacked Jacobians of tasks 1..k. The result is norm-saturated to v_max.
    """
    if not tasks:
        raise EmptyTaskList("compose needs at least one task")

    v = task_velocity(tasks[0], damping, threshold)
    stack = [tasks[0].jacobian]
    for task in tasks[1:]:
        N = null_projector(np.vstack(stack), damping, threshold)
        v = v + N @ task_velocity(task, damping, threshold)
        stack.append(task.jacobian)
    return saturate(v, v_max)
