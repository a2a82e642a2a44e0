"""Run the bundled campaign configs and write CSV + JSON reports to results/.

    python scripts/run_campaigns.py                 # every config
    python scripts/run_campaigns.py exponential_counts noise_error_vs_s --trials 200
"""

import argparse
import json
import sys
from pathlib import Path

from huffcs.sim import CampaignConfig, fit_trend, run_campaign

ROOT = Path(__file__).resolve().parent.parent
CAMPAIGNS = ["exponential_counts", "uniform_cost_bound", "noise_error_vs_s", "noise_error_vs_level", "noise_error_vs_dim"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", default=CAMPAIGNS, metavar="NAME", help=f"any of {CAMPAIGNS}")
    ap.add_argument("--trials", type=int, help="override every config's trial count")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=ROOT / "results")
    args = ap.parse_args(argv)
    unknown = set(args.names) - set(CAMPAIGNS)
    if unknown:
        ap.error(f"unknown campaigns {sorted(unknown)}")
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for name in args.names:
        doc = json.loads((ROOT / "configs" / f"{name}.json").read_text())
        if args.trials:
            doc["trials"] = args.trials
        cfg = CampaignConfig.from_dict(doc)
        print(f"[{name}] seed {cfg.seed}, {cfg.trials} trials, sweep {cfg.sweep}={cfg.values}", file=sys.stderr)
        rep = run_campaign(cfg, workers=args.workers)
        (args.out_dir / f"{name}.csv").write_text(rep.to_csv())
        (args.out_dir / f"{name}.json").write_text(json.dumps(rep.to_dict(), indent=2) + "\n")
        print(rep.to_csv(), end="")
        if cfg.sweep and len(cfg.values) >= 3:
            errs = [p.summary()["mean_rel_err_pct"] for p in rep.points]
            if any(errs):
                slope, icpt, r2 = fit_trend(cfg.values, errs)
                print(f"# error trend: slope {slope:.4g}, intercept {icpt:.4g}, R^2 {r2:.4f}")
            slope, icpt, r2 = fit_trend(cfg.values, [p.mean_count for p in rep.points])
            print(f"# count trend: slope {slope:.4g}, intercept {icpt:.4g}, R^2 {r2:.4f}")


if __name__ == "__main__":
    main()
