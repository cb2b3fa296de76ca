"""Two distribution changes (1 -> 2 -> 1) comparing v=50 against the reweighted
penalty w=2 with v=100; DPP with ratio averaging for reference."""

from _common import P_AV, AlgoParams, ScenarioSpec, adaptive, parser, run


def main():
    args = parser(__doc__, horizon=30_000).parse_args()
    third = args.horizon // 3
    spec = ScenarioSpec("system2", schedule=((1, 1), (third + 1, 2), (2 * third + 1, 1)),
                        seed=args.seed, p_av=P_AV)
    run(args, "reweight_adaptive_v50", spec, "adaptive", adaptive(spec, 50))
    run(args, "reweight_adaptive_v100_w2", spec, "adaptive", adaptive(spec, 100, w=2.0))
    run(args, "reweight_dpp_ratio_v50", spec, "dpp_ratio", AlgoParams(v=50))


if __name__ == "__main__":
    main()
