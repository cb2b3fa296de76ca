"""Adaptive renewal controller: max-weight row selection, a prox-regularised update of
the auxiliary rate gamma, and capped virtual queues.

Per task k the controller
  1. picks the row minimising  -v R + J T + Q.(wY)   (smallest index on exact ties),
  2. sets gamma[k] = clamp(gamma[k-1] + (v R - J T - Q.(wY)) / (gamma[k-1] alpha v^2)),
  3. updates Q_i <- clamp(Q_i + w Y_i, 0, q_i v) and J <- max(0, J + T - 1/gamma[k]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .core import AlgoParams, Bounds, DerivedConstants, TaskMatrix, Vec, clamp


@dataclass(frozen=True)
class ControllerState:
    Q: Vec
    J: float
    gamma: float
    k: int = 1

    @classmethod
    def initial(cls, n: int, gamma_min: float) -> "ControllerState":
        return cls(Q=(0.0,) * n, J=0.0, gamma=gamma_min, k=1)

    def lyapunov(self) -> float:
        return 0.5 * self.J * self.J + 0.5 * sum(x * x for x in self.Q)

    def to_json(self) -> dict:
        # json writes floats with repr(), which round-trips exactly
        return {"Q": list(self.Q), "J": self.J, "gamma": self.gamma, "k": self.k}

    @classmethod
    def from_json(cls, d: dict) -> "ControllerState":
        if set(d) != {"Q", "J", "gamma", "k"}:
            raise ValueError(f"bad controller state keys {sorted(d)}")
        return cls(tuple(float(x) for x in d["Q"]), float(d["J"]), float(d["gamma"]), int(d["k"]))


@dataclass(frozen=True)
class Decision:
    row_index: int  # 0-based
    T: float
    R: float
    Y: Vec


@dataclass(frozen=True)
class StepDiagnostics:
    delta_L: float
    L_before: float
    L_after: float
    Z: float
    indicators: Tuple[bool, ...]
    gamma_objective_value: float
    drift_rhs: float


def _weighted_dot(Q: Vec, Y: Vec, w: float) -> float:
    s = 0.0
    for qi, yi in zip(Q, Y):
        s += qi * (w * yi)
    return s


def row_objectives(A: TaskMatrix, state: ControllerState, params: AlgoParams) -> List[float]:
    v, w, J, Q = params.v, params.w, state.J, state.Q
    return [-v * A.R[r] + J * A.T[r] + _weighted_dot(Q, A.Y[r], w) for r in range(A.m)]


def select_row(A: TaskMatrix, state: ControllerState, params: AlgoParams) -> Decision:
    objs = row_objectives(A, state, params)
    best = 0
    for r in range(1, len(objs)):
        if objs[r] < objs[best]:
            best = r
    return Decision(best, A.T[best], A.R[best], A.Y[best])


def gamma_objective(g: float, state: ControllerState, dec: Decision, params: AlgoParams) -> float:
    """The per-task quadratic in gamma that the update minimises."""
    v = params.v
    lin = -v * dec.R + state.J * dec.T + _weighted_dot(state.Q, dec.Y, params.w)
    return g * lin + 0.5 * state.gamma * params.alpha * v * v * (g - state.gamma) ** 2


def update_gamma(state: ControllerState, dec: Decision, params: AlgoParams,
                 consts: DerivedConstants) -> float:
    v, gp = params.v, state.gamma
    num = v * dec.R - state.J * dec.T - _weighted_dot(state.Q, dec.Y, params.w)
    return clamp(gp + num / (gp * params.alpha * v * v), consts.gamma_min, consts.gamma_max)


def update_queues(state: ControllerState, dec: Decision, gamma_k: float,
                  params: AlgoParams) -> Tuple[Vec, float]:
    v, w = params.v, params.w
    Q = tuple(clamp(qi + w * yi, 0.0, cap * v) for qi, yi, cap in zip(state.Q, dec.Y, params.q))
    J = max(0.0, state.J + dec.T - 1.0 / gamma_k)
    return Q, J


def step(state: ControllerState, A: TaskMatrix, params: AlgoParams, consts: DerivedConstants,
         bounds: Optional[Bounds] = None) -> Tuple[Decision, ControllerState, StepDiagnostics]:
    """One task of the adaptive algorithm; rows are checked against ``bounds`` if given."""
    if bounds is not None:
        A.validate(bounds)
    if A.n != len(state.Q):
        raise ValueError(f"task matrix has n={A.n}, controller tracks {len(state.Q)} queues")
    dec = select_row(A, state, params)
    g = update_gamma(state, dec, params, consts)
    Q, J = update_queues(state, dec, g, params)
    new = ControllerState(Q, J, g, state.k + 1)

    v, w = params.v, params.w
    L0 = state.lyapunov()
    L1 = new.lyapunov()
    ind = tuple(qi > cap * v - ym for qi, cap, ym in zip(state.Q, params.q, consts.y_max))
    diag = StepDiagnostics(
        delta_L=L1 - L0,
        L_before=L0,
        L_after=L1,
        Z=math.sqrt(sum(x * x for x in state.Q)),
        indicators=ind,
        gamma_objective_value=gamma_objective(g, state, dec, params),
        drift_rhs=consts.b + state.J * (dec.T - 1.0 / g) + _weighted_dot(state.Q, dec.Y, w),
    )
    return dec, new, diag


def check_step(prev: ControllerState, dec: Decision, new: ControllerState, diag: StepDiagnostics,
               params: AlgoParams, consts: DerivedConstants, tol: float = 1e-9) -> List[str]:
    """Per-step invariants of the analysis; returns human-readable violations.

    Queue caps and the gamma box are exact.  The J bound and drift bound allow
    ``tol`` relative to the magnitude of the quantities compared.
    """
    out = []
    v = params.v
    for i, (qi, cap) in enumerate(zip(new.Q, params.q)):
        if not (0.0 <= qi <= cap * v):
            out.append(f"k={prev.k}: Q[{i}]={qi} outside [0, {cap * v}]")
    if not (consts.gamma_min <= new.gamma <= consts.gamma_max):
        out.append(f"k={prev.k}: gamma={new.gamma} outside [{consts.gamma_min}, {consts.gamma_max}]")
    jb = consts.j_bound(v)
    if not (0.0 <= new.J <= jb + tol * max(1.0, jb)):
        out.append(f"k={prev.k}: J={new.J} outside [0, {jb}]")
    scale = max(1.0, abs(diag.L_before), abs(diag.L_after), abs(diag.drift_rhs))
    if diag.delta_L > diag.drift_rhs + tol * scale:
        out.append(f"k={prev.k}: drift {diag.delta_L} exceeds bound {diag.drift_rhs}")
    if prev.J >= v * consts.beta1 and new.gamma > prev.gamma:
        out.append(f"k={prev.k}: J={prev.J} >= v*beta1 but gamma rose {prev.gamma} -> {new.gamma}")
    return out
