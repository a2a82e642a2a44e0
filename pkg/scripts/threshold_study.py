"""Relative error under the two threshold rules for uniform noise.

With ``T = E|eta| = N/4`` half of all readings on empty sets exceed the
threshold whatever N is, so descents wander; ``T = sup|eta| = N/2`` never
misfires on an empty set.  Prints one CSV row per (rule, sweep value).
"""

import argparse
import csv
import sys

from huffcs.sim import CampaignConfig, run_campaign


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["rule", "sweep", "value", "mean_count", "mean_rel_err_pct", "success_rate"])
    for rule in ("mean_abs", "max_abs"):
        for sweep, values in (("s", [4, 8, 16, 32]), ("N", [0.02, 0.05, 0.1, 0.16])):
            cfg = CampaignConfig(
                model={"marginal": {"position_pdf": "uniform"}}, n=512, s=16, amplitude=20,
                noise={"kind": "uniform", "level": 0.1}, threshold=rule, trials=args.trials,
                seed=args.seed, sweep=sweep, values=values,
            )
            for p in run_campaign(cfg).points:
                row = p.summary()
                w.writerow([rule, sweep, p.sweep_value, f"{row['mean_count']:.2f}",
                            f"{row['mean_rel_err_pct']:.3f}", f"{row['success_rate']:.3f}"])


if __name__ == "__main__":
    main()
