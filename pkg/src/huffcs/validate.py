"""Randomized checks of the tree and cost guarantees.

Each check draws random explicit models, evaluates one guarantee on every
model and reports the worst slack it saw.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .model import random_explicit
from .recovery import exact_expected_cost
from .tree import build_tree, special_nodes

TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    trials: int
    failures: list = field(default_factory=list)
    worst: float = -math.inf  # largest (observed - allowed) seen

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.trials} models, {len(self.failures)} failures, worst slack {self.worst:+.3g}"


def classic_huffman_length(weights) -> float:
    """Average codeword length of a binary Huffman code for ``weights``.

    Uses the fact that the average length equals the sum of all merged
    weights (divided by the total).
    """
    w = [float(x) for x in weights]
    total = math.fsum(w)
    if len(w) < 2 or total == 0:
        return 0.0
    heapq.heapify(w)
    acc = 0.0
    while len(w) > 1:
        merged = heapq.heappop(w) + heapq.heappop(w)
        acc += merged
        heapq.heappush(w, merged)
    return acc / total


def check_tree_invariants(models: int = 500, seed: int = 0, max_n: int = 12, max_s: int = 3) -> CheckResult:
    """At most one special node; min ell <= log2|node| (+1 at the special node)."""
    rng = np.random.default_rng(seed)
    res = CheckResult("tree invariants", models)
    for k in range(models):
        n = int(rng.integers(2, max_n + 1))
        s = int(rng.integers(1, min(max_s, n) + 1))
        model = random_explicit(n, s, rng)
        tree = build_tree(model)
        special = {node.id for node in special_nodes(tree)}
        if len(special) > 1:
            res.failures.append((k, "special nodes", len(special)))
        for node in tree.internal_nodes():
            best = min(node.cost_left, node.cost_right)
            bound = math.log2(node.size) + (1 if node.id in special else 0)
            slack = best - bound
            res.worst = max(res.worst, slack)
            if slack > TOL:
                res.failures.append((k, sorted(node.index_set), best, bound))
            loose = best - math.log2(node.size) - 1
            if loose > TOL:
                res.failures.append((k, "loose bound", sorted(node.index_set), best))
    return res


def check_huffman_optimality(models: int = 200, seed: int = 0, max_n: int = 8, tol: float = 1e-9) -> CheckResult:
    """1-sparse laws: expected descent length equals the Huffman code length."""
    rng = np.random.default_rng(seed)
    res = CheckResult("1-sparse optimality", models)
    for k in range(models):
        n = int(rng.integers(1, max_n + 1))
        model = random_explicit(n, 1, rng, allow_empty=False, keep=1.0)
        cost = exact_expected_cost(model, mode="locate_one")
        ref = classic_huffman_length([model.table.get(frozenset({i}), 0.0) for i in range(n)])
        gap = abs(cost - ref)
        res.worst = max(res.worst, gap - tol)
        if gap > tol:
            res.failures.append((k, cost, ref))
    return res


def check_locate_bound(models: int = 200, seed: int = 0, max_n: int = 16, max_s: int = 3) -> CheckResult:
    """Nonzero s-sparse laws: expected descent length is at most log2 n + 1."""
    rng = np.random.default_rng(seed)
    res = CheckResult("one-component cost bound", models)
    for k in range(models):
        n = int(rng.integers(2, max_n + 1))
        s = int(rng.integers(1, min(max_s, n) + 1))
        model = random_explicit(n, s, rng, allow_empty=False)
        cost = exact_expected_cost(model, mode="locate_one", nonzero_only=True)
        slack = cost - (math.log2(n) + 1)
        res.worst = max(res.worst, slack)
        if slack > TOL:
            res.failures.append((k, n, s, cost))
    return res


def run_all(models: int = 500, seed: int = 0) -> list[CheckResult]:
    return [
        check_tree_invariants(models, seed),
        check_huffman_optimality(min(models, 200), seed),
        check_locate_bound(min(models, 200), seed),
    ]
