"""Strict JSON experiment configuration.

Example::

    {
      "scenario": {"system": "system2", "schedule": [[1, 1], [10001, 2]], "p_av": 0.3333333333333333},
      "algorithm": "adaptive",
      "params": {"v": 50, "alpha": "tuned", "q": [805.0], "w": 1},
      "horizon": 20000, "replications": 40, "seed": 7,
      "window": 200, "workers": 1, "output": "out.csv"
    }

Finite-support scenarios give ``"system": "finite_support"`` and ``"atoms"``, a list
of ``{"p": prob, "rows": [[T, R, Y_1, ...], ...]}``.  Unknown keys are errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

from .core import AlgoParams, tune_alpha
from .harness import ALGORITHMS, fingerprint
from .scenarios import FiniteSupportSpec, ScenarioSpec


class ConfigError(ValueError):
    pass


_TOP = {"scenario", "algorithm", "params", "horizon", "replications", "seed", "window",
        "workers", "output", "slater_s", "theta_star"}
_TOP_REQUIRED = {"scenario", "algorithm", "horizon", "replications", "seed"}
_SCENARIO = {"system", "schedule", "p_av", "atoms"}
_PARAMS = {"v", "alpha", "q", "w"}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioSpec
    algorithm: str
    params: AlgoParams
    horizon: int
    replications: int
    window: int = 200
    workers: int = 1
    output: Optional[str] = None
    slater_s: Optional[float] = None
    theta_star: Optional[float] = None
    raw: Optional[dict] = None

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.raw or {})


def _check_keys(d, allowed, required, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(extra)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {sorted(missing)}")


def _int(d, key, lo):
    x = d[key]
    if isinstance(x, bool) or not isinstance(x, int) or x < lo:
        raise ConfigError(f"{key} must be an integer >= {lo}, got {x!r}")
    return x


def parse_config(d: dict) -> ExperimentConfig:
    _check_keys(d, _TOP, _TOP_REQUIRED, "config")
    sc = d["scenario"]
    _check_keys(sc, _SCENARIO, {"system"}, "scenario")
    try:
        finite = FiniteSupportSpec.from_json(sc["atoms"]) if "atoms" in sc else None
        spec = ScenarioSpec(
            system=sc["system"],
            schedule=tuple(tuple(x) for x in sc.get("schedule", [[1, 1]])),
            seed=_int(d, "seed", 0),
            p_av=float(sc.get("p_av", 1.0 / 3.0)),
            finite=finite,
        )
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad scenario: {exc}") from exc

    algo = d["algorithm"]
    if algo not in ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {algo!r}")

    pd = d.get("params", {})
    _check_keys(pd, _PARAMS, set(), "params")
    alpha: Union[str, float] = pd.get("alpha", 1.0)
    try:
        if alpha == "tuned":
            alpha = tune_alpha(spec.bounds())
        q = tuple(float(x) for x in pd.get("q", [0.0] * spec.n))
        params = AlgoParams(v=float(pd.get("v", 1.0)), alpha=float(alpha), q=q,
                            w=float(pd.get("w", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad params: {exc}") from exc
    if len(params.q) != spec.n:
        raise ConfigError(f"params.q needs {spec.n} entries, got {len(params.q)}")

    opt = {}
    for key in ("slater_s", "theta_star"):
        if key in d:
            if not isinstance(d[key], (int, float)) or isinstance(d[key], bool):
                raise ConfigError(f"{key} must be a number")
            opt[key] = float(d[key])
    out = d.get("output")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output must be a path string")
    return ExperimentConfig(
        scenario=spec, algorithm=algo, params=params,
        horizon=_int(d, "horizon", 1), replications=_int(d, "replications", 1),
        window=_int(d, "window", 1) if "window" in d else 200,
        workers=_int(d, "workers", 1) if "workers" in d else 1,
        output=out, raw=d, **opt,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(d)
