"""Shared bits for the experiment scripts."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from renewalopt import oracle  # noqa: E402
from renewalopt.core import AlgoParams, suggested_q, tune_alpha  # noqa: E402
from renewalopt.harness import emit_csv, run_ensemble  # noqa: E402
from renewalopt.scenarios import ScenarioSpec, system2_surrogate  # noqa: E402

P_AV = 1.0 / 3.0


def parser(desc, horizon, reps=40):
    ap = argparse.ArgumentParser(description=desc)
    ap.add_argument("--out", default="results")
    ap.add_argument("--horizon", type=int, default=horizon)
    ap.add_argument("--replications", type=int, default=reps)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    return ap


def adaptive(spec, v, w=1.0):
    b = spec.bounds()
    a = tune_alpha(b)
    q = ()
    if spec.n:
        s = oracle.slater_margin(system2_surrogate(1, 10, spec.p_av))
        q = suggested_q(b, v, a, s, w)
    return AlgoParams(v=v, alpha=a, q=q, w=w)


def run(args, name, spec, algo, params):
    s = run_ensemble(spec, algo, params, args.horizon, args.replications, workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{name}.csv")
    emit_csv(s, path)
    tail = f"cum {s.cum_ratio[-1]:.4f}"
    if s.power_ratio is not None:
        tail += f"  power {s.power_ratio[-1]:.4f}"
    print(f"{name:28s} {tail}  -> {path}")
    return s
