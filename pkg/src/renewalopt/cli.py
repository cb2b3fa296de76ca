"""Command line entry point: ``renewalopt {simulate,theta-star,constants,check}``.

Exit codes: 0 ok, 1 config error, 2 invariant violation, 3 oracle infeasible.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import oracle
from .config import ConfigError, ExperimentConfig, load_config
from .core import derive_constants
from .harness import InvariantViolation, emit_csv, run_ensemble, run_replication

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_INFEASIBLE = 0, 1, 2, 3


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def cmd_simulate(cfg: ExperimentConfig, out) -> int:
    out = out or cfg.output
    try:
        summ = run_ensemble(cfg.scenario, cfg.algorithm, cfg.params, cfg.horizon, cfg.replications,
                            window=cfg.window, workers=cfg.workers,
                            config_fingerprint=cfg.fingerprint)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if out:
        emit_csv(summ, out)
        print(f"wrote {summ.horizon} rows to {out}")
    line = f"fingerprint {summ.fingerprint[:16]}  cum_ratio[{summ.horizon}] = {summ.cum_ratio[-1]:.6g}"
    if summ.power_ratio is not None:
        line += f"  power_ratio = {summ.power_ratio[-1]:.6g}"
    print(line)
    return EXIT_OK


def cmd_theta_star(cfg: ExperimentConfig) -> int:
    if cfg.scenario.system != "finite_support":
        print("config error: theta-star needs a finite_support scenario", file=sys.stderr)
        return EXIT_CONFIG
    res = oracle.theta_star(cfg.scenario.finite)
    if not res.feasible:
        print(f"infeasible: no policy meets the penalty constraints (slater margin {res.slater_s:.6g})")
        return EXIT_INFEASIBLE
    print(json.dumps({
        "theta_star": res.theta_star,
        "slater_s": _jsonable(res.slater_s),
        "policy": [list(p) for p in res.policy],
        "expectation_point": list(res.expectation_point),
    }, indent=2))
    return EXIT_OK


def cmd_constants(cfg: ExperimentConfig) -> int:
    try:
        c = derive_constants(cfg.scenario.bounds(), cfg.params, cfg.slater_s, cfg.theta_star)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    d = {k: _jsonable(v) for k, v in c.as_dict().items()}
    d["alpha"] = cfg.params.alpha
    print(json.dumps(d, indent=2))
    return EXIT_OK


def cmd_check(cfg: ExperimentConfig) -> int:
    if cfg.algorithm != "adaptive":
        print("config error: the invariant sweep runs the adaptive controller", file=sys.stderr)
        return EXIT_CONFIG
    total = 0
    for rep in range(cfg.replications):
        tr = run_replication(cfg.scenario, "adaptive", cfg.params, cfg.horizon, rep, strict=False)
        for msg in tr.violations[:5]:
            print(f"rep {rep}: {msg}")
        total += len(tr.violations)
    print(f"{cfg.replications} replications x {cfg.horizon} tasks: {total} violations")
    return EXIT_INVARIANT if total else EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="renewalopt")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("simulate", help="run an ensemble and write the CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    for name, hlp in (("theta-star", "exact optimum of a finite-support scenario"),
                      ("constants", "print the derived analysis constants"),
                      ("check", "per-step invariant sweep")):
        sub.add_parser(name, help=hlp).add_argument("--config", required=True)
    args = ap.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.cmd == "simulate":
        return cmd_simulate(cfg, args.out)
    if args.cmd == "theta-star":
        return cmd_theta_star(cfg)
    if args.cmd == "constants":
        return cmd_constants(cfg)
    return cmd_check(cfg)


if __name__ == "__main__":
    sys.exit(main())
