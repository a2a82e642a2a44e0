"""Command-line frontend.

Machine-readable output (JSON or CSV) goes to ``--out`` or stdout; the config
echo, the resolved seed and all diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .model import ModelError, load_model
from .noise import THRESHOLD_RULES, NoiseSpec, predict, threshold_for
from .recovery import CancellationError, MeasurementOracle, load_signal, recover, signal_to_dict
from .sim import CampaignConfig, benchmark, benchmark_csv, run_campaign
from .tree import build_tree
from .validate import run_all


class CliError(Exception):
    """Bad input; reported on stderr with exit status 2."""


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
        _note(f"wrote {out}")
    else:
        sys.stdout.write(text)


def _echo(config: dict, seed) -> None:
    _note("config: " + json.dumps(config, sort_keys=True))
    _note(f"seed: {seed if seed is not None else 'none (deterministic)'}")


def _read_model(path: str):
    try:
        return load_model(path)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None
    except ModelError as exc:
        raise CliError(f"{path}: {exc}") from None


def _read_signal(path: str):
    try:
        return load_signal(path)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: not valid JSON ({exc})") from None
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def _noise(text: str | None) -> NoiseSpec | None:
    if text is None:
        return None
    try:
        return NoiseSpec.parse(text)
    except ValueError as exc:
        raise CliError(f"--noise: {exc}") from None


def _threshold(text: str | None):
    """Number, rule name, or None."""
    if text is None or text in THRESHOLD_RULES:
        return text
    try:
        value = float(text)
    except ValueError:
        raise CliError(f"--threshold must be a number or one of {THRESHOLD_RULES}, got {text!r}") from None
    if value < 0:
        raise CliError("--threshold must be nonnegative")
    return value


def cmd_tree(args) -> int:
    model = _read_model(args.model)
    indices = None
    if args.indices:
        try:
            indices = [int(i) for i in args.indices.split(",")]
        except ValueError:
            raise CliError(f"--indices must be comma-separated integers, got {args.indices!r}") from None
    _echo({"command": "tree", "model": args.model, "indices": indices}, None)
    try:
        tree = build_tree(model, indices)
    except ModelError as exc:
        raise CliError(str(exc)) from None
    _emit(json.dumps(tree.to_dict(), indent=2), args.out)
    return 0


def cmd_recover(args) -> int:
    model = _read_model(args.model)
    x = _read_signal(args.signal)
    if x.shape[0] != model.n:
        raise CliError(f"{args.signal}: signal has n={x.shape[0]} but the model has n={model.n}")
    noise = _noise(args.noise) or NoiseSpec()
    rule = _threshold(args.threshold)
    try:
        threshold = rule if isinstance(rule, float) else threshold_for(noise, rule or "mean_abs")
    except ValueError as exc:
        raise CliError(f"--threshold: {exc}") from None
    seed = args.seed if args.seed is not None else 0
    _echo({
        "command": "recover", "model": args.model, "signal": args.signal,
        "noise": noise.to_dict(), "threshold": threshold, "s": args.s, "precheck": not args.no_precheck,
    }, seed)
    oracle = MeasurementOracle(x, noise, np.random.default_rng(seed))
    status = 0
    try:
        res = recover(model, oracle, args.s, threshold, precheck=not args.no_precheck)
    except CancellationError as exc:
        _note(f"error: {exc}")
        res, status = exc.result, 1
    doc = res.to_dict(traces=args.traces)
    doc["x_hat"] = signal_to_dict(res.x_hat)
    doc["threshold"] = threshold
    doc["seed"] = seed
    _emit(json.dumps(doc, indent=2), args.out)
    return status


def _campaign(args) -> CampaignConfig:
    try:
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CliError(f"{args.config}: no such file") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{args.config}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise CliError(f"{args.config}: a campaign config must be an object")
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.noise is not None:
        doc["noise"] = args.noise
    if args.threshold is not None:
        doc["threshold"] = _threshold(args.threshold)
    try:
        config = CampaignConfig.from_dict(doc)
        config.resolve(config.points()[0])
    except (ValueError, TypeError) as exc:
        raise CliError(f"{args.config}: {exc}") from None
    return config


def cmd_simulate(args) -> int:
    config = _campaign(args)
    _echo(config.to_dict(), config.seed)
    report = run_campaign(config, workers=args.workers)
    for p in report.points:
        if p.cancellations:
            _note(f"sweep value {p.sweep_value}: {p.cancellations} cancellation(s) recorded")
    _emit(report.to_csv(), args.out)
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
        _note(f"wrote {args.report}")
    return 0


def cmd_predict(args) -> int:
    if args.sigma_x <= 0:
        raise CliError("--sigma-x must be positive")
    if args.sigma_eta < 0:
        raise CliError("--sigma-eta must be nonnegative")
    _echo({"command": "predict", "sigma_eta": args.sigma_eta, "sigma_x": args.sigma_x, "s": args.s, "n": args.n}, None)
    pred = predict(args.sigma_eta, args.sigma_x, args.s, args.n)
    doc = {
        "t": pred.t,
        "threshold": threshold_for(NoiseSpec("gaussian", args.sigma_eta)),
        "p_single": pred.p_single,
        "p_recovery": pred.p_recovery,
        "p_recovery_linear": pred.p_recovery_linear,
        "s": args.s,
        "n": args.n,
    }
    _emit(json.dumps(doc, indent=2), args.out)
    return 0


def cmd_validate(args) -> int:
    seed = args.seed if args.seed is not None else 0
    _echo({"command": "validate", "models": args.models}, seed)
    results = run_all(args.models, seed)
    lines = [r.line() for r in results]
    _emit("\n".join(lines), args.out)
    return 0 if all(r.passed for r in results) else 1


def cmd_bench(args) -> int:
    seed = args.seed if args.seed is not None else 0
    try:
        s_values = [int(v) for v in args.s_values.split(",")]
    except ValueError:
        raise CliError(f"--s-values must be comma-separated integers, got {args.s_values!r}") from None
    if any(not 0 <= s <= args.n for s in s_values):
        raise CliError(f"--s-values must lie in [0, {args.n}]")
    _echo({"command": "bench", "n": args.n, "s_values": s_values, "trials": args.trials}, seed)
    rows = benchmark(args.n, s_values, args.trials, seed)
    _emit(benchmark_csv(rows), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="huffcs", description="Adaptive sparse recovery with Huffman-planned binary queries.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{tree,recover,simulate,predict,validate,bench}")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.set_defaults(func=func)
        p.add_argument("--out", help="write output here instead of stdout")
        return p

    p = add("tree", cmd_tree, "Build and dump the planning tree of a model.")
    p.add_argument("--model", required=True, help="model file (JSON)")
    p.add_argument("--indices", help="comma-separated subset to build over")

    p = add("recover", cmd_recover, "Recover a signal through the measurement oracle.")
    p.add_argument("--model", required=True)
    p.add_argument("--signal", required=True, help='signal file: {"n": ..., "entries": [[i, v], ...]}')
    p.add_argument("--s", type=int, help="override the model's sparsity")
    p.add_argument("--noise", help="none | uniform:N | gaussian:SIGMA")
    p.add_argument("--threshold", help=f"number or one of {', '.join(THRESHOLD_RULES)} (default mean_abs)")
    p.add_argument("--seed", type=int, help="noise seed (default 0)")
    p.add_argument("--no-precheck", action="store_true", help="skip the all-ones zero test")
    p.add_argument("--traces", action="store_true", help="include per-round descent traces")

    p = add("simulate", cmd_simulate, "Run a Monte-Carlo campaign and write its CSV report.")
    p.add_argument("--config", required=True, help="campaign config (JSON)")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--noise")
    p.add_argument("--threshold")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report", help="also write the JSON report here")

    p = add("predict", cmd_predict, "Closed-form error predictions for Gaussian noise.")
    p.add_argument("--sigma-eta", type=float, required=True)
    p.add_argument("--sigma-x", type=float, default=1.0)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--n", type=int, default=1024)

    p = add("validate", cmd_validate, "Run the randomized tree and cost checks.")
    p.add_argument("--models", type=int, default=500)
    p.add_argument("--seed", type=int)

    p = add("bench", cmd_bench, "Time noiseless recoveries on the uniform model.")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--s-values", default="1,25,50,75,100,125,150")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _note(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
