"""Task-matrix generators: the two simulated systems, finite-support instances,
penalty transforms and distribution-change schedules."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import Bounds, TaskMatrix

SYSTEMS = ("system1", "system2", "finite_support")

SYSTEM1_BOUNDS = Bounds(t_min=1.0, t_max=10.0, r_max=500.0)

# cumulative P[M <= 1], P[M <= 2], P[M <= 3] for the number of rows
_SYSTEM1_ROWS_CDF = {1: (0.1, 0.7, 0.85), 2: (0.0, 0.2, 0.6)}
SYSTEM1_ROWS_PMF = {1: (0.1, 0.6, 0.15, 0.15), 2: (0.0, 0.2, 0.4, 0.4)}


def penalty_transform(raw: Mapping[str, Sequence[float]], p_av: float,
                      q_av: Optional[float] = None) -> TaskMatrix:
    """Turn (duration, reward, energy[, quality]) columns into a task matrix.

    Penalties are ``q_av - quality`` (per-task quality floor, only when ``q_av`` is
    given) followed by ``energy - p_av * duration`` (power budget).
    """
    for col in ("duration", "reward", "energy"):
        if col not in raw:
            raise KeyError(f"missing column {col!r}")
    if q_av is not None and "quality" not in raw:
        raise KeyError("missing column 'quality'")
    T = [float(x) for x in raw["duration"]]
    R = [float(x) for x in raw["reward"]]
    E = [float(x) for x in raw["energy"]]
    if not (len(T) == len(R) == len(E)):
        raise ValueError("columns differ in length")
    Y = []
    for r in range(len(T)):
        y = []
        if q_av is not None:
            y.append(q_av - float(raw["quality"][r]))
        y.append(E[r] - p_av * T[r])
        Y.append(tuple(y))
    return TaskMatrix(tuple(T), tuple(R), tuple(Y))


def shift_rewards(R: float, T: float, r_min: float, t_min: float) -> float:
    """Map a reward in [-r_min, r_max] to the nonnegative R + (r_min/t_min) T.

    The ratio objective only moves by the constant r_min/t_min.
    """
    return R + (r_min / t_min) * T


# ---------------------------------------------------------------- System 1

def sample_system1(dist_id: int, u: Sequence[float]) -> TaskMatrix:
    """Project-selection matrix, no penalties.

    Draw layout: u[0] picks the row count; row r >= 2 uses u[3r-5], u[3r-4], u[3r-3]
    for duration, slope G and (distribution 2 only) offset H.
    """
    if dist_id not in _SYSTEM1_ROWS_CDF:
        raise ValueError(f"System 1 has distributions 1 and 2, not {dist_id}")
    m = bisect.bisect_right(_SYSTEM1_ROWS_CDF[dist_id], u[0]) + 1
    T = [1.0]
    R = [0.0]
    for r in range(m - 1):
        t = 1.0 + 9.0 * u[1 + 3 * r]
        if dist_id == 1:
            g = 50.0 * u[2 + 3 * r]
            T.append(t)
            R.append(t * g)
        else:
            g = 10.0 + 20.0 * u[2 + 3 * r]
            h = 200.0 * u[3 + 3 * r]
            T.append(t)
            R.append(g * t + h)
    return TaskMatrix(tuple(T), tuple(R), ((),) * m)


# ---------------------------------------------------------------- System 2

def system2_rows(dist_id: int, u1: float, u2: float) -> dict:
    """Raw (duration, reward, energy) columns: idle, local processing, cloud offload."""
    if dist_id == 1:
        r2 = 10.0 * u1 * (u2 + 1.0)
    elif dist_id == 2:
        r2 = min(20.0 * (u2 + 1.0), 20.0)
    else:
        raise ValueError(f"System 2 has distributions 1 and 2, not {dist_id}")
    return {
        "duration": (1.0, 1.0 + 9.0 * u1, 6.0 + 6.0 * u1),
        "reward": (0.0, r2, 10.0 * u1 * (u2 + 1.0)),
        "energy": (0.0, 1.0 + 9.0 * u1, u1),
    }


def sample_system2(dist_id: int, u: Sequence[float], p_av: float = 1.0 / 3.0) -> TaskMatrix:
    return penalty_transform(system2_rows(dist_id, u[0], u[1]), p_av)


def system2_bounds(p_av: float = 1.0 / 3.0) -> Bounds:
    # each penalty is affine in u1, so extremes sit at u1 in {0, 1}
    ys = [-p_av]
    for u1 in (0.0, 1.0):
        ys.append((1.0 + 9.0 * u1) * (1.0 - p_av))
        ys.append(u1 - p_av * (6.0 + 6.0 * u1))
    y_max = max(0.0, max(ys))
    y_min = max(0.0, -min(ys))
    return Bounds(t_min=1.0, t_max=12.0, r_max=20.0, c=max(y_max, y_min),
                  y_min=(y_min,), y_max=(y_max,))


def system2_power_filter(p_av: float = 1.0 / 3.0) -> Callable[[float, float, Sequence[float]], bool]:
    """Row predicate energy/duration <= p_av, i.e. Y <= 0 for the power penalty."""
    def ok(T: float, R: float, Y: Sequence[float]) -> bool:
        return (Y[-1] + p_av * T) / T <= p_av
    return ok


# ---------------------------------------------------------------- finite support

@dataclass(frozen=True)
class FiniteSupportSpec:
    atoms: Tuple[Tuple[float, TaskMatrix], ...]

    def __post_init__(self):
        atoms = tuple((float(p), a) for p, a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValueError("need at least one atom")
        if any(p <= 0 for p, _ in atoms):
            raise ValueError("atom probabilities must be positive")
        if abs(math.fsum(p for p, _ in atoms) - 1.0) > 1e-12:
            raise ValueError("atom probabilities must sum to 1")
        if len({a.n for _, a in atoms}) != 1:
            raise ValueError("atoms disagree on penalty dimension")

    @property
    def n(self) -> int:
        return self.atoms[0][1].n

    @property
    def probs(self) -> Tuple[float, ...]:
        return tuple(p for p, _ in self.atoms)

    @property
    def matrices(self) -> Tuple[TaskMatrix, ...]:
        return tuple(a for _, a in self.atoms)

    @property
    def _cdf(self) -> Tuple[float, ...]:
        cached = self.__dict__.get("_cdf_cache")
        if cached is None:
            cached = tuple(np.cumsum(self.probs)[:-1].tolist())
            object.__setattr__(self, "_cdf_cache", cached)
        return cached

    def tight_bounds(self) -> Bounds:
        Ts = [t for a in self.matrices for t in a.T]
        Rs = [r for a in self.matrices for r in a.R]
        Ys = [y for a in self.matrices for y in a.Y]
        n = self.n
        y_max = tuple(max(0.0, max(y[i] for y in Ys)) for i in range(n))
        y_min = tuple(max(0.0, -min(y[i] for y in Ys)) for i in range(n))
        c = max(math.sqrt(sum(x * x for x in y)) for y in Ys) if n else 0.0
        return Bounds(min(Ts), max(Ts), max(Rs), c, y_min, y_max)

    def to_json(self) -> list:
        return [{"p": p, "rows": [[a.T[r], a.R[r], *a.Y[r]] for r in range(a.m)]}
                for p, a in self.atoms]

    @classmethod
    def from_json(cls, atoms: Sequence[Mapping]) -> "FiniteSupportSpec":
        out = []
        for atom in atoms:
            if set(atom) != {"p", "rows"}:
                raise ValueError(f"atom keys must be 'p' and 'rows', got {sorted(atom)}")
            out.append((atom["p"], TaskMatrix.from_rows(atom["rows"])))
        return cls(tuple(out))


def sample_finite_support(spec: FiniteSupportSpec, u: Sequence[float]) -> TaskMatrix:
    return spec.atoms[bisect.bisect_right(spec._cdf, u[0])][1]


def system2_surrogate(dist_id: int, grid: int = 10, p_av: float = 1.0 / 3.0) -> FiniteSupportSpec:
    """Midpoint discretisation of (U1, U2) on a grid x grid lattice."""
    p = 1.0 / (grid * grid)
    atoms = []
    for i in range(grid):
        for j in range(grid):
            u = ((i + 0.5) / grid, (j + 0.5) / grid)
            atoms.append((p, sample_system2(dist_id, u, p_av)))
    # sum of grid*grid copies of p may miss 1 by an ulp; renormalise the last atom
    last = 1.0 - math.fsum(a[0] for a in atoms[:-1])
    atoms[-1] = (last, atoms[-1][1])
    return FiniteSupportSpec(tuple(atoms))


# ---------------------------------------------------------------- schedules

Schedule = Tuple[Tuple[int, int], ...]


def validate_schedule(schedule: Sequence[Sequence[int]]) -> Schedule:
    sched = tuple((int(s), int(d)) for s, d in schedule)
    if not sched or sched[0][0] != 1:
        raise ValueError("schedule must start at task 1")
    starts = [s for s, _ in sched]
    if any(b <= a for a, b in zip(starts, starts[1:])):
        raise ValueError("change points must be strictly increasing")
    return sched


def distribution_at(schedule: Sequence[Sequence[int]], k: int) -> int:
    if k < 1:
        raise ValueError("tasks are numbered from 1")
    starts = [s for s, _ in schedule]
    return schedule[bisect.bisect_right(starts, k) - 1][1]


@dataclass(frozen=True)
class ScenarioSpec:
    system: str
    schedule: Schedule = ((1, 1),)
    seed: int = 0
    p_av: float = 1.0 / 3.0
    finite: Optional[FiniteSupportSpec] = None
    bounds_override: Optional[Bounds] = field(default=None, compare=False)

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}; expected one of {SYSTEMS}")
        object.__setattr__(self, "schedule", validate_schedule(self.schedule))
        if self.system == "finite_support":
            if self.finite is None:
                raise ValueError("finite_support scenario needs atoms")
            if any(d != 1 for _, d in self.schedule):
                raise ValueError("finite_support scenarios have a single distribution (id 1)")
        elif any(d not in (1, 2) for _, d in self.schedule):
            raise ValueError("distribution ids must be 1 or 2")

    @property
    def n(self) -> int:
        if self.system == "finite_support":
            return self.finite.n
        return 0 if self.system == "system1" else 1

    @property
    def has_energy(self) -> bool:
        return self.system == "system2"

    def bounds(self) -> Bounds:
        if self.bounds_override is not None:
            return self.bounds_override
        if self.system == "system1":
            return SYSTEM1_BOUNDS
        if self.system == "system2":
            return system2_bounds(self.p_av)
        return self.finite.tight_bounds()

    def sampler(self) -> Callable[[int, Sequence[float]], TaskMatrix]:
        """Return f(k, draws) -> A[k] following the schedule."""
        sched = self.schedule
        if self.system == "system1":
            return lambda k, u: sample_system1(distribution_at(sched, k), u)
        if self.system == "system2":
            p_av = self.p_av
            return lambda k, u: sample_system2(distribution_at(sched, k), u, p_av)
        spec = self.finite
        return lambda k, u: sample_finite_support(spec, u)
