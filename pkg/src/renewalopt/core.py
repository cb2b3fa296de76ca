"""Domain types, boundedness data and the derived constants of the analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

Vec = Tuple[float, ...]

# slack for floating-point round-off when checking generated rows against bounds
ROW_TOL = 1e-12


def clamp(z: float, lo: float, hi: float) -> float:
    """Project ``z`` onto ``[lo, hi]``."""
    if lo > hi:
        raise ValueError(f"clamp: empty interval [{lo}, {hi}]")
    return min(hi, max(lo, z))


@dataclass(frozen=True)
class TaskRow:
    duration: float
    reward: float
    penalties: Vec = ()


@dataclass(frozen=True)
class Bounds:
    t_min: float
    t_max: float
    r_max: float
    c: float = 0.0
    y_min: Vec = ()
    y_max: Vec = ()

    def __post_init__(self):
        object.__setattr__(self, "y_min", tuple(float(x) for x in self.y_min))
        object.__setattr__(self, "y_max", tuple(float(x) for x in self.y_max))
        if not self.t_min > 0:
            raise ValueError("t_min must be positive")
        if self.t_min > self.t_max:
            raise ValueError("t_min must not exceed t_max")
        if self.r_max < 0 or self.c < 0:
            raise ValueError("r_max and c must be nonnegative")
        if len(self.y_min) != len(self.y_max):
            raise ValueError("y_min and y_max must have the same length")
        if any(x < 0 for x in self.y_min + self.y_max):
            raise ValueError("y_min and y_max entries must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.y_min)

    @property
    def gamma_min(self) -> float:
        return 1.0 / self.t_max

    @property
    def gamma_max(self) -> float:
        return 1.0 / self.t_min

    def scaled(self, w: float) -> "Bounds":
        """Bounds of the reweighted penalty process w*Y."""
        if w == 1.0:
            return self
        return Bounds(self.t_min, self.t_max, self.r_max, w * self.c,
                      tuple(w * y for y in self.y_min), tuple(w * y for y in self.y_max))

    def row_violation(self, T: float, R: float, Y: Sequence[float]) -> Optional[str]:
        """Describe how a row breaks the bounds, or None if it complies."""
        tol_t = ROW_TOL * max(1.0, self.t_max)
        if not (self.t_min - tol_t <= T <= self.t_max + tol_t):
            return f"duration {T} outside [{self.t_min}, {self.t_max}]"
        if not (-ROW_TOL <= R <= self.r_max + ROW_TOL * max(1.0, self.r_max)):
            return f"reward {R} outside [0, {self.r_max}]"
        if len(Y) != self.n:
            return f"penalty dimension {len(Y)} != {self.n}"
        sq = 0.0
        for i, y in enumerate(Y):
            tol = ROW_TOL * max(1.0, self.y_max[i], self.y_min[i])
            if not (-self.y_min[i] - tol <= y <= self.y_max[i] + tol):
                return f"penalty {i} = {y} outside [{-self.y_min[i]}, {self.y_max[i]}]"
            sq += y * y
        if math.sqrt(sq) > self.c + ROW_TOL * max(1.0, self.c):
            return f"penalty norm {math.sqrt(sq)} exceeds c={self.c}"
        return None


class BoundsViolation(ValueError):
    pass


@dataclass(frozen=True)
class TaskMatrix:
    """One task's option set, stored column-wise: T[r], R[r], Y[r][i]."""

    T: Vec
    R: Vec
    Y: Tuple[Vec, ...]

    def __post_init__(self):
        if len(self.T) == 0:
            raise ValueError("task matrix needs at least one row")
        if not (len(self.T) == len(self.R) == len(self.Y)):
            raise ValueError("ragged task matrix")
        if len({len(y) for y in self.Y}) != 1:
            raise ValueError("rows disagree on penalty dimension")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]], n: Optional[int] = None) -> "TaskMatrix":
        """Build from rows laid out as ``[T, R, Y_1, ..., Y_n]``."""
        rows = [tuple(float(x) for x in r) for r in rows]
        if n is not None and any(len(r) != n + 2 for r in rows):
            raise ValueError(f"every row must have {n + 2} entries")
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows),
                   tuple(tuple(r[2:]) for r in rows))

    @property
    def m(self) -> int:
        return len(self.T)

    @property
    def n(self) -> int:
        return len(self.Y[0])

    @property
    def rows(self) -> Tuple[TaskRow, ...]:
        return tuple(TaskRow(t, r, y) for t, r, y in zip(self.T, self.R, self.Y))

    def validate(self, bounds: Bounds) -> None:
        for idx in range(self.m):
            msg = bounds.row_violation(self.T[idx], self.R[idx], self.Y[idx])
            if msg is not None:
                raise BoundsViolation(f"row {idx + 1}: {msg}")


@dataclass(frozen=True)
class AlgoParams:
    v: float
    alpha: float = 1.0
    q: Vec = ()
    w: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        if not self.v > 0:
            raise ValueError("v must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if any(x < 0 for x in self.q):
            raise ValueError("q entries must be nonnegative")
        if not self.w > 0:
            raise ValueError("w must be positive")


@dataclass(frozen=True)
class DerivedConstants:
    gamma_min: float
    gamma_max: float
    b: float
    beta1: float
    beta2: float
    d0: float
    d1: float
    d2: float
    c1: float
    c2: float
    lam: Optional[float] = None
    eta: Optional[float] = None
    rho: Optional[float] = None
    d: Optional[float] = None
    theta_star_hint: Optional[float] = None
    # penalty bounds seen by the controller (after reweighting by w)
    y_max: Vec = field(default=())

    def j_bound(self, v: float) -> float:
        return v * (self.beta1 + self.beta2)

    def as_dict(self) -> dict:
        out = {}
        for name in ("gamma_min", "gamma_max", "b", "beta1", "beta2", "d0", "d1", "d2",
                     "lam", "eta", "rho", "d", "c1", "c2", "theta_star_hint"):
            out[name] = getattr(self, name)
        return out


def tuning_coefficients(bounds: Bounds) -> Tuple[float, float]:
    t0, t1, r = bounds.t_min, bounds.t_max, bounds.r_max
    c1 = r + (t1 - t0) * (1 + r) / t0
    c2 = ((t1 - t0) / t0) * (t1 / t0 + t0 / t1 - 2)
    return c1, c2


def tune_alpha(bounds: Bounds) -> float:
    """alpha minimising the non-vanishing reward-gap coefficient, capped for tiny c2."""
    c1, c2 = tuning_coefficients(bounds)
    return c1 / max(c2, 0.5)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def derive_constants(bounds: Bounds, params: AlgoParams, slater_s: Optional[float] = None,
                     theta_star: Optional[float] = None) -> DerivedConstants:
    """Evaluate every constant of the analysis.

    Penalty bounds and ``slater_s`` refer to the raw penalties; they are scaled by
    ``params.w`` because the controller works on w*Y.  ``d2`` needs the optimal
    ratio; when ``theta_star`` is absent the upper bound r_max/t_min is used.
    """
    if slater_s is not None and not slater_s > 0:
        raise ValueError("slater margin must be positive")
    if slater_s is not None and slater_s > bounds.c:
        # a policy with E[Y_i] <= -s needs y_min_i >= s, hence c >= s
        raise ValueError(f"slater margin {slater_s} exceeds the penalty norm bound c={bounds.c}")
    if len(params.q) != bounds.n:
        raise ValueError(f"q has {len(params.q)} entries, bounds have n={bounds.n}")
    eb = bounds.scaled(params.w)
    t0, t1, r, c = eb.t_min, eb.t_max, eb.r_max, eb.c
    v, alpha, q = params.v, params.alpha, params.q

    g0 = 1.0 / t1
    g1 = 1.0 / t0
    b = 0.5 * (c ** 2 + (t1 - t0) ** 2)
    beta1 = (1 + r + sum(qi * yi for qi, yi in zip(q, eb.y_min))) / t0
    beta2 = (1 / v) * math.ceil(alpha * v * g1 * (g1 - g0)) * (t1 - t0)
    beta = beta1 + beta2
    qnorm = math.sqrt(sum(qi * qi for qi in q))
    th = theta_star if theta_star is not None else r / t0
    d1 = (b + (r + c * qnorm + (t1 - t0) * beta) ** 2 / (2 * g0 ** 2 * alpha)) / t0
    d2 = (0.5 * qnorm ** 2 + 0.5 * beta ** 2 + 0.5 * alpha * (g1 - g0) ** 2 + th * beta) / t0
    d0 = 2 * r + 2 * beta * (t1 - t0) + c ** 2 / v
    c1, c2 = tuning_coefficients(eb)

    lam = eta = rho = d = None
    if slater_s is not None:
        s = params.w * slater_s
        lam = max(v * d0 / s - s / 4, s / 2)
        eta = (s / 2) / (c ** 2 + c * s / 6)
        rho = 1 - eta * s / 4
        d = (_exp(eta * c) - rho) * _exp(eta * lam) / (1 - rho)

    return DerivedConstants(
        gamma_min=g0, gamma_max=g1, b=b, beta1=beta1, beta2=beta2, d0=d0, d1=d1, d2=d2,
        c1=c1, c2=c2, lam=lam, eta=eta, rho=rho, d=d, theta_star_hint=theta_star,
        y_max=eb.y_max,
    )



def suggested_q(bounds: Bounds, v: float, alpha: float, slater_s: float, w: float = 1.0) -> Vec:
    """Queue-cap multipliers q_i = 2 d0 / s, all equal.

    d0 depends on q through beta1, so the rule is circular; it is evaluated at q = 0.
    ``slater_s`` is the margin of the raw penalties.
    """
    if not slater_s > 0:
        raise ValueError("slater margin must be positive")
    base = derive_constants(bounds, AlgoParams(v=v, alpha=alpha, q=(0.0,) * bounds.n, w=w))
    return (2.0 * base.d0 / (w * slater_s),) * bounds.n
