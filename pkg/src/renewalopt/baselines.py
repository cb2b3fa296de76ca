"""Comparison policies: greedy ratio, Robbins-Monro with stepsize 1/(k+1), and
drift-plus-penalty with a running-ratio estimate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

from .controller import Decision
from .core import TaskMatrix, Vec

RowFilter = Callable[[float, float, Sequence[float]], bool]


def greedy_step(A: TaskMatrix, constraint_filter: Optional[RowFilter] = None) -> Decision:
    best = None
    best_ratio = 0.0
    for r in range(A.m):
        if constraint_filter is not None and not constraint_filter(A.T[r], A.R[r], A.Y[r]):
            continue
        ratio = A.R[r] / A.T[r]
        if best is None or ratio > best_ratio:
            best, best_ratio = r, ratio
    if best is None:
        raise ValueError("every row was filtered out")
    return Decision(best, A.T[best], A.R[best], A.Y[best])


@dataclass(frozen=True)
class RmState:
    theta: float = 0.0
    k: int = 1
    # tasks on which theta left [0, r_max/t_min]; flagged, never clamped
    excursions: int = 0


def robbins_monro_step(state: RmState, A: TaskMatrix,
                       theta_cap: Optional[float] = None) -> Tuple[Decision, RmState]:
    """Pick argmax R - theta T, then theta += (R - theta T) / (k + 1)."""
    if A.n != 0:
        raise ValueError("Robbins-Monro baseline handles unconstrained problems only")
    th = state.theta
    best = 0
    best_score = A.R[0] - th * A.T[0]
    for r in range(1, A.m):
        score = A.R[r] - th * A.T[r]
        if score > best_score:
            best, best_score = r, score
    T, R = A.T[best], A.R[best]
    new_theta = th + (R - th * T) / (state.k + 1)
    exc = state.excursions
    if theta_cap is not None and not (0.0 <= new_theta <= theta_cap):
        exc += 1
    return Decision(best, T, R, A.Y[best]), RmState(new_theta, state.k + 1, exc)


@dataclass(frozen=True)
class DppState:
    Q: Vec
    cum_R: float = 0.0
    cum_T: float = 0.0
    k: int = 1

    @classmethod
    def initial(cls, n: int) -> "DppState":
        return cls((0.0,) * n)

    @property
    def theta(self) -> float:
        return self.cum_R / self.cum_T if self.k > 1 else 0.0


def dpp_ratio_step(state: DppState, A: TaskMatrix, v: float) -> Tuple[Decision, DppState]:
    if not v > 0:
        raise ValueError("v must be positive")
    th = state.theta
    Q = state.Q
    best = 0
    best_obj = None
    for r in range(A.m):
        obj = -v * (A.R[r] - th * A.T[r])
        for qi, yi in zip(Q, A.Y[r]):
            obj += qi * yi
        if best_obj is None or obj < best_obj:
            best, best_obj = r, obj
    T, R, Y = A.T[best], A.R[best], A.Y[best]
    newQ = tuple(max(0.0, qi + yi) for qi, yi in zip(Q, Y))
    return Decision(best, T, R, Y), DppState(newQ, state.cum_R + R, state.cum_T + T, state.k + 1)
