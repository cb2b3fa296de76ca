"""System 2 (power-constrained offloading): stationary runs under distribution 1
and a switch to distribution 2 at the halfway point."""

from _common import P_AV, AlgoParams, ScenarioSpec, adaptive, parser, run


def main():
    ap = parser(__doc__, horizon=5000)
    ap.add_argument("--switch", action="store_true")
    args = ap.parse_args()
    if args.switch:
        half = args.horizon // 2
        spec = ScenarioSpec("system2", schedule=((1, 1), (half + 1, 2)), seed=args.seed, p_av=P_AV)
        tag = "s2_switch"
        runs = [("adaptive_v50", "adaptive", adaptive(spec, 50)),
                ("dpp_ratio_v50", "dpp_ratio", AlgoParams(v=50))]
    else:
        spec = ScenarioSpec("system2", seed=args.seed, p_av=P_AV)
        tag = "s2_dist1"
        runs = [("greedy", "greedy", AlgoParams(v=1)),
                ("dpp_ratio_v50", "dpp_ratio", AlgoParams(v=50))]
        runs += [(f"adaptive_v{v}", "adaptive", adaptive(spec, v)) for v in (10, 50, 200)]
    for name, algo, p in runs:
        run(args, f"{tag}_{name}", spec, algo, p)


if __name__ == "__main__":
    main()
