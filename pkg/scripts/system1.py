"""System 1 (project selection, no penalties): stationary comparison and a
distribution switch at the halfway point."""

from _common import AlgoParams, ScenarioSpec, adaptive, parser, run


def main():
    ap = parser(__doc__, horizon=10_000)
    ap.add_argument("--switch", action="store_true", help="run the two-distribution schedule")
    args = ap.parse_args()
    if args.switch:
        half = args.horizon // 2
        spec = ScenarioSpec("system1", schedule=((1, 1), (half + 1, 2)), seed=args.seed)
        tag = "s1_switch"
        runs = [("adaptive_v10", "adaptive", adaptive(spec, 10)),
                ("robbins_monro", "robbins_monro", AlgoParams(v=1))]
    else:
        spec = ScenarioSpec("system1", seed=args.seed)
        tag = "s1_dist1"
        runs = [("greedy", "greedy", AlgoParams(v=1)),
                ("robbins_monro", "robbins_monro", AlgoParams(v=1))]
        runs += [(f"adaptive_v{v}", "adaptive", adaptive(spec, v)) for v in (1, 2, 10)]
    for name, algo, p in runs:
        run(args, f"{tag}_{name}", spec, algo, p)


if __name__ == "__main__":
    main()
