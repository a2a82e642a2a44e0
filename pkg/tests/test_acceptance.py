"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run with pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time

import numpy as np
import pytest

from huffcs.model import MarginalModel, random_explicit, worked_example_model
from huffcs.noise import predict_single_error, simulate_single_error, single_error_expansion
from huffcs.recovery import exact_count_variance, exact_expected_cost
from huffcs.sim import CampaignConfig, fit_trend, run_campaign
from huffcs.tree import build_tree
from huffcs.validate import check_huffman_optimality, check_locate_bound, check_tree_invariants

RESULTS: list[str] = []


def record(number: int, title: str, ok: bool, detail: str, seconds: float) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail} [{seconds:.1f}s]"
    RESULTS.append(line)
    if __name__ == "__main__":
        print(line, flush=True)


def test_criterion_1_worked_example_tree():
    t0 = time.perf_counter()
    model = worked_example_model()
    tree = build_tree(model)
    m = len(tree.order)
    merges = []
    for k in range(m, len(tree.q)):
        node = tree.root.__class__(tree, k)
        merges.append((sorted(node.left.index_set), sorted(node.right.index_set)))
    want_merges = [([2], [3]), ([1], [2, 3]), ([0], [1, 2, 3])]
    leaf_q = [tree.leaf(i).q for i in range(4)]
    q_err = max(abs(a - b) for a, b in zip(leaf_q, [0.61, 0.54, 0.3, 0.26]))
    ok = merges == want_merges and q_err <= 1e-12
    record(1, "worked-example tree", ok, f"merges {merges}, leaf q max error {q_err:.1e}", time.perf_counter() - t0)
    assert ok


def test_criterion_2_one_sparse_optimality():
    t0 = time.perf_counter()
    res = check_huffman_optimality(models=200, seed=2, max_n=8, tol=1e-9)
    gap = res.worst + 1e-9
    record(2, "1-sparse optimality", res.passed, f"200 models, {len(res.failures)} failures, max |gap| {gap:.1e}",
           time.perf_counter() - t0)
    assert res.passed


def test_criterion_3_locate_bound():
    t0 = time.perf_counter()
    res = check_locate_bound(models=200, seed=3, max_n=16, max_s=3)
    record(3, "log2 n + 1 bound", res.passed,
           f"200 models, {len(res.failures)} failures, max cost - bound {res.worst:+.3f}", time.perf_counter() - t0)
    assert res.passed


def test_criterion_4_sparse_cost_bound():
    t0 = time.perf_counter()
    n = 1024
    cfg = CampaignConfig(
        model={"marginal": {"n": n, "s": 1, "position_pdf": "uniform"}}, n=n, trials=1000, seed=4,
        sweep="s", values=[1, 25, 50, 150],
    )
    rep = run_campaign(cfg)
    ok = True
    parts = []
    for p in rep.points:
        s = p.sweep_value
        bound = s * math.log2(n) + 2 * s
        good = int(p.counts.max()) <= bound and bool(p.exact.all())
        ok &= good
        parts.append(f"s={s}: max {p.counts.max()} <= {bound:g}, mean {p.mean_count:.2f}, exact {p.exact.mean():.0%}")
    record(4, "s log n + 2s bound", ok, "; ".join(parts), time.perf_counter() - t0)
    assert ok


def test_criterion_5_exponential_mean_counts():
    t0 = time.perf_counter()
    n = 2**15
    cfg = CampaignConfig(
        model={"marginal": {"n": n, "s": 1, "position_pdf": "exponential", "mean": 10}}, n=n,
        positions="exponential", mean=10, trials=1000, seed=5, sweep="s", values=[1, 3],
    )
    rep = run_campaign(cfg)
    ok = True
    parts = []
    for p, target in zip(rep.points, (9.11, 27.5)):
        good = abs(p.mean_count - target) <= 0.15 * target
        ok &= good
        parts.append(
            f"s={p.sweep_value}: mean {p.mean_count:.2f} (var {p.var_count:.2f}) vs {target} "
            f"+-15% [{0.85 * target:.2f}, {1.15 * target:.2f}]"
        )
    record(5, "exponential-law mean counts", ok, "; ".join(parts), time.perf_counter() - t0)
    assert ok


def test_criterion_6_tree_invariants():
    t0 = time.perf_counter()
    res = check_tree_invariants(models=500, seed=6, max_n=12, max_s=3)
    record(6, "tree invariants", res.passed, f"500 models, {len(res.failures)} failures, worst slack {res.worst:+.2e}",
           time.perf_counter() - t0)
    assert res.passed


def test_criterion_7_noise_predictor():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    ok_mc = True
    parts = []
    for t in (0.05, 0.1, 0.2):
        rate, se = simulate_single_error(t, 1.0, 10**6, rng)
        pred = predict_single_error(t, 1.0)
        z = (rate - pred) / se
        ok_mc &= abs(z) <= 3
        parts.append(f"t={t}: MC {rate:.4f} vs formula {pred:.4f} ({z:+.0f} SE)")
    tt = 1e-3
    exact = predict_single_error(tt, 1.0)
    rel = abs(single_error_expansion(tt) - exact) / exact
    ok_exp = rel <= 0.01
    parts.append(f"4t/pi at t=1e-3 off by {rel:.2%} ({'ok' if ok_exp else 'too far'})")
    ok = ok_mc and ok_exp
    record(7, "noise predictor", ok, "; ".join(parts), time.perf_counter() - t0)
    assert ok


def _trend(sweep: str, values, s: int):
    cfg = CampaignConfig(
        model={"marginal": {"position_pdf": "uniform"}}, n=512, s=s, amplitude=20,
        noise={"kind": "uniform", "level": 0.1}, threshold="max_abs", trials=1000, seed=8,
        sweep=sweep, values=list(values),
    )
    ys = [p.summary()["mean_rel_err_pct"] for p in run_campaign(cfg).points]
    slope, _, r2 = fit_trend(values, ys)
    increasing = all(b > a for a, b in zip(ys, ys[1:]))
    return ys, slope, r2, increasing


def test_criterion_8_error_trends():
    t0 = time.perf_counter()
    s_vals = [4, 8, 12, 16, 20, 24, 28, 32]
    n_vals = [0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16]
    ys_s, _, r2_s, inc_s = _trend("s", s_vals, 16)
    ys_n, _, r2_n, inc_n = _trend("N", n_vals, 16)
    ok = inc_s and inc_n and r2_s >= 0.9 and r2_n >= 0.9
    detail = (
        f"s sweep errors {[round(y, 2) for y in ys_s]} (increasing {inc_s}, R^2 {r2_s:.3f}); "
        f"N sweep errors {[round(y, 2) for y in ys_n]} (increasing {inc_n}, R^2 {r2_n:.3f})"
    )
    record(8, "error trends", ok, detail, time.perf_counter() - t0)
    assert ok


def test_criterion_9_oracle_vs_monte_carlo():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    trials = 10_000
    worst = 0.0
    bad = []
    for k in range(20):
        n = int(rng.integers(2, 13))
        s = int(rng.integers(1, min(n, 3) + 1))
        model = random_explicit(n, s, rng)
        spec = {"explicit": [{"support": sorted(sup), "p": p} for sup, p in model.table.items()], "n": n, "s": model.s}
        p = run_campaign(CampaignConfig(model=spec, trials=trials, seed=900 + k)).points[0]
        want = exact_expected_cost(model, mode="full_recovery")
        se = math.sqrt(exact_count_variance(model, mode="full_recovery") / trials)
        dev = abs(p.mean_count - want)
        z = dev / se if se > 0 else (0.0 if dev <= 1e-9 else math.inf)
        worst = max(worst, z)
        if dev > 3 * se + 1e-9:
            bad.append((k, n, s, round(p.mean_count, 4), round(want, 4)))
    ok = not bad
    record(9, "oracle vs Monte Carlo", ok, f"20 models x {trials} trials, worst |z| {worst:.2f}, misses {bad}",
           time.perf_counter() - t0)
    assert ok


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
