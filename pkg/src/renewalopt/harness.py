"""Simulation driver: single replications, ensembles, ratio metrics and CSV output."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import baselines
from .controller import ControllerState, check_step, step
from .core import AlgoParams, DerivedConstants, derive_constants
from .rng import replication_uniforms
from .scenarios import ScenarioSpec, system2_power_filter

ALGORITHMS = ("adaptive", "greedy", "robbins_monro", "dpp_ratio")


class InvariantViolation(RuntimeError):
    pass


@dataclass
class Trace:
    """Per-task record of one replication; arrays are indexed by task k-1.

    ``Q`` and ``J`` have one extra final entry: index k-1 holds the queue at the
    start of task k, for k = 1..horizon+1.
    """

    algorithm: str
    row: np.ndarray
    T: np.ndarray
    R: np.ndarray
    Y: np.ndarray
    Q: np.ndarray
    J: np.ndarray
    gamma: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None
    indicators: Optional[np.ndarray] = None
    delta_L: Optional[np.ndarray] = None
    drift_rhs: Optional[np.ndarray] = None
    violations: List[str] = field(default_factory=list)
    final_state: object = None

    def __len__(self) -> int:
        return len(self.T)


def consts_for(spec: ScenarioSpec, params: AlgoParams, slater_s=None, theta_star=None) -> DerivedConstants:
    return derive_constants(spec.bounds(), params, slater_s, theta_star)


def run_replication(spec: ScenarioSpec, algorithm: str, params: AlgoParams, horizon: int,
                    replication_index: int, check: bool = True, strict: bool = True,
                    start: int = 1, state=None) -> Trace:
    """Simulate tasks start..start+horizon-1 of one replication.

    Policy state carries across distribution changes.  Pass ``state`` (and the
    matching ``start``) to resume from ``Trace.final_state`` of an earlier run.
    With ``check`` the controller's per-step invariants are evaluated; ``strict``
    turns any violation into an ``InvariantViolation``.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    n = spec.n
    if algorithm == "robbins_monro" and n > 0:
        raise ValueError("Robbins-Monro cannot be paired with a constrained scenario")
    if algorithm == "adaptive" and len(params.q) != n:
        raise ValueError(f"params.q has {len(params.q)} entries, scenario has n={n}")

    bounds = spec.bounds()
    sample = spec.sampler()
    draws = replication_uniforms(spec.seed, replication_index, horizon, start)

    row = np.empty(horizon, dtype=np.int64)
    T = np.empty(horizon)
    R = np.empty(horizon)
    Y = np.empty((horizon, n))
    Q = np.zeros((horizon + 1, n))
    J = np.zeros(horizon + 1)
    tr = Trace(algorithm, row, T, R, Y, Q, J)

    if algorithm == "adaptive":
        consts = derive_constants(bounds, params)
        st = state if state is not None else ControllerState.initial(n, consts.gamma_min)
        tr.gamma = np.empty(horizon)
        tr.indicators = np.zeros((horizon, n), dtype=bool)
        tr.delta_L = np.empty(horizon)
        tr.drift_rhs = np.empty(horizon)
        for j in range(horizon):
            A = sample(start + j, draws[j])
            Q[j] = st.Q
            J[j] = st.J
            dec, new, diag = step(st, A, params, consts, bounds)
            if check:
                bad = check_step(st, dec, new, diag, params, consts)
                if bad:
                    tr.violations.extend(bad)
            row[j], T[j], R[j] = dec.row_index, dec.T, dec.R
            Y[j] = dec.Y
            tr.gamma[j] = new.gamma
            tr.indicators[j] = diag.indicators
            tr.delta_L[j] = diag.delta_L
            tr.drift_rhs[j] = diag.drift_rhs
            st = new
        Q[horizon] = st.Q
        J[horizon] = st.J
    elif algorithm == "greedy":
        filt = system2_power_filter(spec.p_av) if spec.system == "system2" else None
        for j in range(horizon):
            A = sample(start + j, draws[j])
            A.validate(bounds)
            dec = baselines.greedy_step(A, filt)
            row[j], T[j], R[j] = dec.row_index, dec.T, dec.R
            Y[j] = dec.Y
        st = None
    elif algorithm == "robbins_monro":
        cap = bounds.r_max / bounds.t_min
        st = state if state is not None else baselines.RmState()
        tr.theta = np.empty(horizon)
        for j in range(horizon):
            A = sample(start + j, draws[j])
            A.validate(bounds)
            dec, st = baselines.robbins_monro_step(st, A, cap)
            row[j], T[j], R[j] = dec.row_index, dec.T, dec.R
            tr.theta[j] = st.theta
        if check and st.excursions:
            tr.violations.append(f"Robbins-Monro theta left [0, {cap}] on {st.excursions} tasks")
    else:
        st = state if state is not None else baselines.DppState.initial(n)
        tr.theta = np.empty(horizon)
        for j in range(horizon):
            A = sample(start + j, draws[j])
            A.validate(bounds)
            Q[j] = st.Q
            dec, st = baselines.dpp_ratio_step(st, A, params.v)
            row[j], T[j], R[j] = dec.row_index, dec.T, dec.R
            Y[j] = dec.Y
            tr.theta[j] = st.theta
        Q[horizon] = st.Q
    tr.final_state = st
    if strict and algorithm == "adaptive" and tr.violations:
        raise InvariantViolation(f"{len(tr.violations)} violations, first: {tr.violations[0]}")
    return tr


# ---------------------------------------------------------------- metrics

def cumulative_ratio(R: Sequence[float], T: Sequence[float], k: int) -> float:
    if k < 1:
        raise ValueError("k must be at least 1")
    return math.fsum(R[:k]) / math.fsum(T[:k])


def window_ratio(R: Sequence[float], T: Sequence[float], k0: int, w: int) -> float:
    """Ratio over the w tasks preceding task k0 (tasks k0-w .. k0-1)."""
    if k0 <= w:
        raise ValueError(f"window needs k0 > w (k0={k0}, w={w})")
    lo, hi = k0 - w - 1, k0 - 1
    return math.fsum(R[lo:hi]) / math.fsum(T[lo:hi])


def power_ratio(Y_energy: Sequence[float], T: Sequence[float], p_av: float, k: int) -> float:
    """Energy per unit time over tasks 1..k, with energy recovered as Y + p_av T."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return math.fsum(Y_energy[j] + p_av * T[j] for j in range(k)) / math.fsum(T[:k])


def cumulative_ratio_series(R: np.ndarray, T: np.ndarray) -> np.ndarray:
    return np.cumsum(R) / np.cumsum(T)


def window_ratio_series(R: np.ndarray, T: np.ndarray, w: int) -> np.ndarray:
    """Entry k-1 is window_ratio(R, T, k, w); NaN where k <= w."""
    out = np.full(len(R), np.nan)
    cR = np.concatenate(([0.0], np.cumsum(R)))
    cT = np.concatenate(([0.0], np.cumsum(T)))
    k = np.arange(w + 1, len(R) + 1)
    out[w:] = (cR[k - 1] - cR[k - 1 - w]) / (cT[k - 1] - cT[k - 1 - w])
    return out


# ---------------------------------------------------------------- ensembles

@dataclass
class EnsembleSummary:
    mean_R: np.ndarray
    mean_T: np.ndarray
    mean_Y: np.ndarray
    mean_J: np.ndarray
    mean_normQ: np.ndarray
    cum_ratio: np.ndarray
    window_ratio: np.ndarray
    power_ratio: Optional[np.ndarray]
    replications: int
    window: int
    fingerprint: str
    traces: Optional[List[Trace]] = None

    @property
    def horizon(self) -> int:
        return len(self.mean_R)

    @property
    def n(self) -> int:
        return self.mean_Y.shape[1]


def fingerprint(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _replicate(args):
    spec, algorithm, params, horizon, rep, check = args
    return run_replication(spec, algorithm, params, horizon, rep, check=check)


def run_ensemble(spec: ScenarioSpec, algorithm: str, params: AlgoParams, horizon: int,
                 replications: int, window: int = 200, workers: int = 1, check: bool = True,
                 keep_traces: bool = False, config_fingerprint: str = "") -> EnsembleSummary:
    """Average ``replications`` independent runs task by task.

    Replications may execute in parallel; means are accumulated in replication
    order so the result does not depend on ``workers``.
    """
    if replications < 1:
        raise ValueError("need at least one replication")
    jobs = [(spec, algorithm, params, horizon, rep, check) for rep in range(replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_replicate, jobs))
    else:
        traces = [_replicate(j) for j in jobs]

    n = spec.n
    sR = np.zeros(horizon)
    sT = np.zeros(horizon)
    sY = np.zeros((horizon, n))
    sJ = np.zeros(horizon)
    sZ = np.zeros(horizon)
    for tr in traces:
        sR += tr.R
        sT += tr.T
        sY += tr.Y
        sJ += tr.J[:horizon]
        sZ += np.sqrt(np.sum(tr.Q[:horizon] ** 2, axis=1))
    m = float(replications)
    mR, mT, mY = sR / m, sT / m, sY / m
    power = None
    if spec.has_energy:
        power = cumulative_ratio_series(mY[:, -1] + spec.p_av * mT, mT)
    return EnsembleSummary(
        mean_R=mR, mean_T=mT, mean_Y=mY, mean_J=sJ / m, mean_normQ=sZ / m,
        cum_ratio=cumulative_ratio_series(mR, mT),
        window_ratio=window_ratio_series(mR, mT, window),
        power_ratio=power, replications=replications, window=window,
        fingerprint=config_fingerprint, traces=traces if keep_traces else None,
    )


# ---------------------------------------------------------------- CSV

def csv_header(n: int, with_power: bool) -> List[str]:
    cols = ["k", "mean_R", "mean_T"] + [f"mean_Y_{i + 1}" for i in range(n)]
    cols += ["cum_ratio", "window_ratio"]
    if with_power:
        cols.append("power_ratio")
    return cols + ["mean_J", "mean_normQ"]


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else format(float(x), ".17g")


def emit_csv(summary: EnsembleSummary, path) -> None:
    if summary.horizon == 0:
        raise ValueError("refusing to write an empty summary")
    with_power = summary.power_ratio is not None
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(csv_header(summary.n, with_power))
            for j in range(summary.horizon):
                rec = [str(j + 1), _fmt(summary.mean_R[j]), _fmt(summary.mean_T[j])]
                rec += [_fmt(x) for x in summary.mean_Y[j]]
                rec += [_fmt(summary.cum_ratio[j]), _fmt(summary.window_ratio[j])]
                if with_power:
                    rec.append(_fmt(summary.power_ratio[j]))
                rec += [_fmt(summary.mean_J[j]), _fmt(summary.mean_normQ[j])]
                wr.writerow(rec)
    except OSError as exc:
        raise OSError(f"could not write CSV to {path}: {exc}") from exc


def read_csv(path) -> dict:
    """Parse an emitted CSV into column arrays (blank cells become NaN)."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {}
    for i, name in enumerate(header):
        vals = [r[i] for r in body]
        if name == "k":
            cols[name] = np.array([int(x) for x in vals])
        else:
            cols[name] = np.array([float(x) if x else np.nan for x in vals])
    return cols
