"""Closed-form error predictions next to a Monte-Carlo disagreement rate."""

import argparse

import numpy as np

from huffcs.noise import predict, simulate_single_error


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--draws", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--s", type=int, default=8)
    ap.add_argument("--n", type=int, default=512)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print("t,p_single,mc_rate,mc_se,p_recovery,p_recovery_linear")
    for t in (0.001, 0.01, 0.05, 0.1, 0.2):
        pred = predict(t, 1.0, args.s, args.n)
        rate, se = simulate_single_error(t, 1.0, args.draws, rng)
        print(f"{t},{pred.p_single:.6f},{rate:.6f},{se:.2e},{pred.p_recovery:.6f},{pred.p_recovery_linear:.6f}")


if __name__ == "__main__":
    main()
