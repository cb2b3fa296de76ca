"""Exact optimal ratio, Slater margin and distance to the achievable set for
finite-support task distributions.

With atom probabilities p_a and joint variables x(a, r) = p_a * P[row r | atom a],
the achievable expectations (t, r, y) form a polytope, and the best ratio is the
largest theta with  max_x sum x (R - theta T) >= 0  over feasible x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .lp import linprog_max
from .scenarios import FiniteSupportSpec

BISECT_TOL = 1e-10

StationaryPolicy = Tuple[Tuple[float, ...], ...]


@dataclass
class OracleResult:
    theta_star: float
    policy: Optional[StationaryPolicy]
    slater_s: float
    feasible: bool
    expectation_point: Optional[Tuple[float, ...]]  # (t, r, y_1..y_n)
    trajectory: List[Tuple[float, float]] = field(default_factory=list, repr=False)


def _columns(spec: FiniteSupportSpec):
    """Flatten atoms into joint-variable columns plus the per-atom row offsets."""
    T, R, Y, offsets = [], [], [], [0]
    for a in spec.matrices:
        T.extend(a.T)
        R.extend(a.R)
        Y.extend(a.Y)
        offsets.append(offsets[-1] + a.m)
    Ymat = np.array(Y, dtype=float).reshape(len(T), spec.n)
    return np.array(T), np.array(R), Ymat, offsets


def _atom_equalities(spec: FiniteSupportSpec, offsets, extra: int = 0):
    nv = offsets[-1]
    A_eq = np.zeros((len(spec.atoms), nv + extra))
    for j in range(len(spec.atoms)):
        A_eq[j, offsets[j]:offsets[j + 1]] = 1.0
    return A_eq, np.array(spec.probs)


def policy_from_joint(spec: FiniteSupportSpec, x: np.ndarray, offsets) -> StationaryPolicy:
    out = []
    for j, p in enumerate(spec.probs):
        v = np.maximum(x[offsets[j]:offsets[j + 1]], 0.0) / p
        v = v / v.sum()
        out.append(tuple(float(z) for z in v))
    return tuple(out)


def policy_expectation(spec: FiniteSupportSpec, policy: Sequence[Sequence[float]]) -> Tuple[float, ...]:
    """(t, r, y...) expectation of a stationary randomised row choice."""
    acc = np.zeros(2 + spec.n)
    for (p, a), probs in zip(spec.atoms, policy):
        if len(probs) != a.m:
            raise ValueError("policy vector length differs from atom row count")
        for r, pr in enumerate(probs):
            acc += p * pr * np.array((a.T[r], a.R[r], *a.Y[r]))
    return tuple(float(z) for z in acc)


def _bracket(spec: FiniteSupportSpec) -> float:
    b = spec.tight_bounds()
    return b.r_max / b.t_min


def theta_star_unconstrained(spec: FiniteSupportSpec, tol: float = BISECT_TOL) -> OracleResult:
    if spec.n != 0:
        raise ValueError("theta_star_unconstrained needs n = 0")

    def h(th: float) -> float:
        return math.fsum(p * max(R - th * T for T, R in zip(a.T, a.R)) for p, a in spec.atoms)

    lo, hi = 0.0, _bracket(spec)
    traj = [(lo, h(lo)), (hi, h(hi))]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        hm = h(mid)
        traj.append((mid, hm))
        if hm >= 0.0:
            lo = mid
        else:
            hi = mid
    th = lo
    policy = []
    for a in spec.matrices:
        scores = [R - th * T for T, R in zip(a.T, a.R)]
        best = int(np.argmax(scores))
        policy.append(tuple(1.0 if r == best else 0.0 for r in range(a.m)))
    policy = tuple(policy)
    return OracleResult(th, policy, math.inf, True, policy_expectation(spec, policy), traj)


def _inner_lp(spec, th, T, R, Y, offsets):
    A_eq, b_eq = _atom_equalities(spec, offsets)
    return linprog_max(R - th * T, A_ub=Y.T, b_ub=np.zeros(spec.n), A_eq=A_eq, b_eq=b_eq)


def feasibility(spec: FiniteSupportSpec) -> bool:
    T, R, Y, offsets = _columns(spec)
    return _inner_lp(spec, 0.0, T, R, Y, offsets).status == "optimal"


def theta_star_constrained(spec: FiniteSupportSpec, tol: float = BISECT_TOL) -> OracleResult:
    if spec.n < 1:
        raise ValueError("theta_star_constrained needs n >= 1")
    T, R, Y, offsets = _columns(spec)
    s = slater_margin(spec)
    first = _inner_lp(spec, 0.0, T, R, Y, offsets)
    if first.status != "optimal":
        return OracleResult(math.nan, None, s, False, None)

    lo, hi = 0.0, _bracket(spec)
    traj = [(lo, first.value)]
    best = first
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        res = _inner_lp(spec, mid, T, R, Y, offsets)
        traj.append((mid, res.value))
        if res.value >= 0.0:
            lo, best = mid, res
        else:
            hi = mid
    policy = policy_from_joint(spec, best.x, offsets)
    return OracleResult(lo, policy, s, True, policy_expectation(spec, policy), traj)


def theta_star(spec: FiniteSupportSpec) -> OracleResult:
    return theta_star_unconstrained(spec) if spec.n == 0 else theta_star_constrained(spec)


def slater_margin(spec: FiniteSupportSpec) -> float:
    """Largest s such that some policy has E[Y_i] <= -s for every i (+inf when n = 0)."""
    if spec.n == 0:
        return math.inf
    T, R, Y, offsets = _columns(spec)
    nv = offsets[-1]
    # variables: x (nv) | s_plus | s_minus ; E[Y_i] + s_plus - s_minus <= 0
    A_ub = np.hstack([Y.T, np.ones((spec.n, 1)), -np.ones((spec.n, 1))])
    A_eq, b_eq = _atom_equalities(spec, offsets, extra=2)
    c = np.zeros(nv + 2)
    c[nv], c[nv + 1] = 1.0, -1.0
    res = linprog_max(c, A_ub=A_ub, b_ub=np.zeros(spec.n), A_eq=A_eq, b_eq=b_eq)
    if res.status != "optimal":
        raise RuntimeError(f"Slater LP ended with status {res.status}")
    return res.value


def distance_to_gamma(point: Sequence[float], spec: FiniteSupportSpec, max_iter: int = 10_000,
                      tol: float = 1e-8) -> float:
    """Euclidean distance from (t, r, y...) to the achievable-expectation polytope.

    Block-coordinate pairwise Frank-Wolfe on 0.5 |z(x) - point|^2, one simplex per atom,
    exact line search.  Stops once the duality gap certifies the squared distance to
    within tol^2 or after max_iter sweeps.
    """
    target = np.asarray(point, dtype=float)
    if target.size != 2 + spec.n:
        raise ValueError(f"point must have {2 + spec.n} components")
    V = [np.array([(a.T[r], a.R[r], *a.Y[r]) for r in range(a.m)]) for a in spec.matrices]
    p = np.array(spec.probs)
    # start each atom at its row nearest the target
    X = []
    for Va in V:
        x = np.zeros(len(Va))
        x[int(np.argmin(((Va - target) ** 2).sum(axis=1)))] = 1.0
        X.append(x)

    for _ in range(max_iter):
        z = sum(pa * (x @ Va) for pa, x, Va in zip(p, X, V))  # resync against drift
        gap = 0.0
        for j, (pa, Va) in enumerate(zip(p, V)):
            gr = pa * (Va @ (z - target))
            gap += gr @ X[j] - gr.min()
        if gap <= tol * tol:
            break
        for j, (pa, Va) in enumerate(zip(p, V)):
            x = X[j]
            gr = pa * (Va @ (z - target))
            s = int(np.argmin(gr))
            active = np.flatnonzero(x > 0.0)
            a = int(active[np.argmax(gr[active])])
            if s == a:
                continue
            dz = pa * (Va[s] - Va[a])
            dd = dz @ dz
            if dd == 0.0:
                continue
            step = min(max(-(z - target) @ dz / dd, 0.0), x[a])
            if step <= 0.0:
                continue
            x[s] += step
            x[a] -= step
            if x[a] < 1e-15:
                x[a] = 0.0
            z = z + step * dz
    return float(np.linalg.norm(z - target))
