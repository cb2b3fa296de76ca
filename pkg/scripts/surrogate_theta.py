"""Optimal ratio and Slater margin of the discretised System 2 distributions."""

import argparse

from _common import P_AV, oracle, system2_surrogate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=10)
    args = ap.parse_args()
    for dist in (1, 2):
        res = oracle.theta_star(system2_surrogate(dist, args.grid, P_AV))
        t, r, y = res.expectation_point
        print(f"dist {dist}: theta* = {res.theta_star:.6f}  slater s = {res.slater_s:.6f}  "
              f"E[T] = {t:.4f}  E[R] = {r:.4f}  E[Y] = {y:.2e}")


if __name__ == "__main__":
    main()
