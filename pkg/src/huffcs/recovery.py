"""Adaptive recovery by Huffman-tree descent.

``find_one`` walks a single tree to one active index; ``recover`` repeats it,
replanning the tree on the indices not yet found after each success.
"""

from __future__ import annotations

import json
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import ExplicitModel, ModelError, SupportModel, enumerate_supports
from .noise import NoiseSpec
from .tree import HuffmanTree, TreeNode, build_tree


class CancellationError(RuntimeError):
    """A noiseless descent followed a nonzero branch but read a zero value.

    This only happens when active components cancel inside a measured set.
    The partial result is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class MeasurementOracle:
    """Answers binary inner-product queries against a hidden signal."""

    def __init__(self, x, noise: NoiseSpec | None = None, rng: np.random.Generator | None = None):
        self._x = np.asarray(x, dtype=float).copy()
        self.noise = noise or NoiseSpec()
        if not self.noise.silent and rng is None:
            raise ValueError("a noisy oracle needs a random generator")
        self._rng = rng
        self.count = 0

    @property
    def n(self) -> int:
        return self._x.shape[0]

    def measure(self, members) -> float:
        """``<chi_members, x>`` plus noise."""
        self.count += 1
        y = float(self._x[members].sum())
        if not self.noise.silent:
            y += self.noise.draw(self._rng)
        return y

    def measure_vector(self, a) -> float:
        a = np.asarray(a)
        if a.shape != self._x.shape or not np.isin(a, (0, 1)).all():
            raise ValueError("sampling vectors must be 0/1 vectors of the signal's length")
        return self.measure(np.flatnonzero(a))


@dataclass
class DescentStep:
    node: TreeNode
    measured_left: bool
    value: float
    hit: bool

    @property
    def next_node(self) -> TreeNode:
        return self.node.measured if self.hit else self.node.sibling


@dataclass
class DescentTrace:
    steps: list[DescentStep] = field(default_factory=list)
    leaf: TreeNode | None = None
    value: float = 0.0

    def __len__(self):
        return len(self.steps)

    @property
    def took_hit(self) -> bool:
        return any(step.hit for step in self.steps)

    def to_dict(self) -> dict:
        return {
            "steps": [
                {
                    "node": sorted(st.node.index_set),
                    "measured": sorted(st.node.measured.index_set),
                    "value": st.value,
                    "branch": "measured" if st.hit else "sibling",
                }
                for st in self.steps
            ],
            "leaf": int(self.leaf.min_index),
            "value": self.value,
        }


def find_one(tree: HuffmanTree, oracle: MeasurementOracle, threshold: float = 0.0):
    """Descend ``tree`` to a leaf and read its value.

    At each internal node the measured child's set is queried; a reading
    above ``threshold`` in magnitude sends the walk into that child, otherwise
    into its sibling.  Returns ``(index, value, trace)``; the query count is
    the path length plus one.
    """
    trace = DescentTrace()
    left, right, start, size, order = tree.left, tree.right, tree.start, tree.size, tree.order
    k = len(tree.q) - 1
    while left[k] >= 0:
        go_left = tree.measures_left(k)
        c = left[k] if go_left else right[k]
        y = oracle.measure(order[start[c]:start[c] + size[c]])
        hit = abs(y) > threshold
        trace.steps.append(DescentStep(TreeNode(tree, int(k)), go_left, y, hit))
        k = c if hit else (right[k] if go_left else left[k])
    trace.leaf = TreeNode(tree, int(k))
    trace.value = oracle.measure(order[start[k]:start[k] + 1])
    return int(tree.min_index[k]), trace.value, trace


class TreePlanner:
    """Builds (and caches) the tree for each set of already-found indices."""

    def __init__(self, model: SupportModel, maxsize: int = 32):
        self.model = model
        self.maxsize = maxsize
        self._cache: OrderedDict[frozenset, tuple[SupportModel, HuffmanTree]] = OrderedDict()

    def plan(self, omega) -> tuple[SupportModel, HuffmanTree | None]:
        key = frozenset(omega)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        conditioned = self.model.condition(key) if key else self.model
        tree = build_tree(conditioned) if conditioned.indices else None
        if self.maxsize:
            self._cache[key] = (conditioned, tree)
            if len(self._cache) > self.maxsize:
                self._cache.popitem(last=False)
        return conditioned, tree


@dataclass
class RecoveryResult:
    x_hat: np.ndarray
    found: list[int]
    values: list[float]
    total_measurements: int
    traces: list[DescentTrace]
    precheck: bool
    stop_reason: str

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.found)

    def to_dict(self, traces: bool = False) -> dict:
        out = {
            "n": int(self.x_hat.shape[0]),
            "found": self.found,
            "values": self.values,
            "entries": [[i, v] for i, v in zip(self.found, self.values)],
            "total_measurements": self.total_measurements,
            "rounds": len(self.traces),
            "precheck": self.precheck,
            "stop_reason": self.stop_reason,
        }
        if traces:
            out["traces"] = [tr.to_dict() for tr in self.traces]
        return out


def recover(
    model: SupportModel,
    oracle: MeasurementOracle,
    s: int | None = None,
    threshold: float = 0.0,
    *,
    precheck: bool = True,
    planner: TreePlanner | None = None,
) -> RecoveryResult:
    """Find up to ``s`` active components of the oracle's signal.

    When the model gives the zero signal positive mass, one all-ones query
    is issued first and a quiet reading ends the run.  Each round then
    descends a tree planned on the indices not yet found and stops the run
    on a quiet leaf read.
    """
    if model.n != oracle.n:
        raise ValueError(f"model dimension {model.n} != signal dimension {oracle.n}")
    s = model.s if s is None else s
    planner = planner or TreePlanner(model, maxsize=0)
    start = oracle.count
    x_hat = np.zeros(model.n)
    found: list[int] = []
    values: list[float] = []
    traces: list[DescentTrace] = []

    def result(reason):
        return RecoveryResult(x_hat, found, values, oracle.count - start, traces, did_precheck, reason)

    did_precheck = precheck and model.prob_empty() > 0
    if did_precheck:
        y = oracle.measure(np.fromiter(sorted(model.indices), dtype=np.int64))
        if abs(y) <= threshold:
            return result("precheck")

    while len(found) < s:
        _, tree = planner.plan(found)
        if tree is None:
            return result("exhausted")
        t, value, trace = find_one(tree, oracle, threshold)
        traces.append(trace)
        if abs(value) <= threshold:
            if threshold == 0 and trace.took_hit:
                raise CancellationError(
                    f"descent reached index {t} through a nonzero reading but read 0",
                    result("cancellation"),
                )
            return result("quiet_leaf")
        found.append(t)
        values.append(value)
        x_hat[t] = value
    return result("sparsity")


def _indicator(n: int, support) -> np.ndarray:
    x = np.zeros(n)
    x[list(support)] = 1.0
    return x


def exact_count_law(
    model: SupportModel,
    s: int | None = None,
    mode: str = "locate_one",
    *,
    nonzero_only: bool = False,
    precheck: bool = True,
) -> list[tuple[int, float]]:
    """``(query count, probability)`` for every support of an explicit model.

    A support fixes every noiseless reading, so each one is replayed with a
    positive indicator signal.  ``locate_one`` counts the descent queries of
    the first round only (no value read, no pre-check); ``full_recovery``
    counts everything ``recover`` issues.  ``nonzero_only`` drops the empty
    support and renormalizes.
    """
    if not isinstance(model, ExplicitModel):
        raise ModelError("exact expectations need an explicit model")
    if mode not in ("locate_one", "full_recovery"):
        raise ValueError(f"unknown mode {mode!r}")
    rows = enumerate_supports(model)
    if nonzero_only:
        rows = [(sup, p) for sup, p in rows if sup]
    weight = math.fsum(p for _, p in rows)
    if weight == 0:
        raise ModelError("the model gives no mass to the requested supports")
    planner = TreePlanner(model, maxsize=1024)
    tree = planner.plan(())[1]
    out = []
    for support, p in rows:
        oracle = MeasurementOracle(_indicator(model.n, support))
        if mode == "locate_one":
            find_one(tree, oracle)
            count = oracle.count - 1
        else:
            recover(model, oracle, s, precheck=precheck, planner=planner)
            count = oracle.count
        out.append((count, p / weight))
    return out


def exact_expected_cost(model: SupportModel, s: int | None = None, mode: str = "locate_one", **kw) -> float:
    """Expected query count under the model; see :func:`exact_count_law`."""
    return math.fsum(c * p for c, p in exact_count_law(model, s, mode, **kw))


def exact_count_variance(model: SupportModel, s: int | None = None, mode: str = "locate_one", **kw) -> float:
    law = exact_count_law(model, s, mode, **kw)
    mean = math.fsum(c * p for c, p in law)
    return math.fsum(p * (c - mean) ** 2 for c, p in law)


def load_signal(path) -> np.ndarray:
    """Signal file: ``{"n": ..., "entries": [[index, value], ...]}``."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return signal_from_dict(doc)


def signal_from_dict(doc: dict) -> np.ndarray:
    if not isinstance(doc, dict) or "n" not in doc:
        raise ValueError("signal needs an integer field 'n'")
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise ValueError("signal field 'n' must be a positive integer")
    x = np.zeros(n)
    for k, entry in enumerate(doc.get("entries", [])):
        try:
            i, v = entry
            i = int(i)
        except (TypeError, ValueError):
            raise ValueError(f"signal entries[{k}] must be an [index, value] pair") from None
        if not 0 <= i < n:
            raise ValueError(f"signal entries[{k}] index {i} is outside [0, {n})")
        x[i] = float(v)
    return x


def signal_to_dict(x) -> dict:
    x = np.asarray(x, dtype=float)
    return {"n": int(x.shape[0]), "entries": [[int(i), float(x[i])] for i in np.flatnonzero(x)]}
