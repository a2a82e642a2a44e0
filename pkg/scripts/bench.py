"""Wall-clock per noiseless recovery on the uniform model (n = 1024)."""

import argparse

from huffcs.sim import benchmark, benchmark_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    print(benchmark_csv(benchmark(args.n, (1, 25, 50, 75, 100, 125, 150), args.trials, args.seed)), end="")


if __name__ == "__main__":
    main()
