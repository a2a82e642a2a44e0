"""Probability laws over sparse supports.

Two concrete laws are provided:

* :class:`ExplicitModel` stores a table ``support -> probability`` and is exact.
  It is meant for small ``n`` where every support can be listed.
* :class:`MarginalModel` treats each index as independently active with
  probability ``p[i]``.  It scales to ``n = 2**15`` because the activity
  probability of a set factorizes.

Indices are 0-based throughout.  A model remembers the index set it lives on;
conditioning on found indices removes them from that set.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

NORMALIZATION_TOL = 1e-12
ENUMERATION_CAP = 20


class ModelError(ValueError):
    """Invalid model definition or an undefined query on a model."""


class UnsupportedOperation(ModelError):
    pass


def _as_index_set(indices: Iterable[int]) -> frozenset[int]:
    return frozenset(int(i) for i in indices)


class SupportModel:
    """Common surface of the support laws.

    Subclasses implement ``q_of``, ``condition`` and ``prob_empty`` plus the
    three ``_*_state`` hooks used by the tree builder to compute the activity
    probability of a merged node without rescanning its members.
    """

    n: int
    s: int
    indices: frozenset[int]

    def q_of(self, subset: Iterable[int]) -> float:
        raise NotImplementedError

    def condition(self, omega: Iterable[int]) -> "SupportModel":
        raise NotImplementedError

    def prob_empty(self) -> float:
        raise NotImplementedError

    def _check_subset(self, subset: frozenset[int]) -> None:
        bad = subset - self.indices
        if bad:
            raise ModelError(f"indices {sorted(bad)} are outside the model's index set")

    # tree-builder protocol
    def _leaf_state(self, i: int):
        raise NotImplementedError

    def _join_state(self, a, b):
        raise NotImplementedError

    def _state_q(self, state) -> float:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class ExplicitModel(SupportModel):
    """Exact law given as a table of support probabilities.

    ``table`` maps index sets to probabilities; entries with zero probability
    are dropped.  ``s`` defaults to the largest support carrying mass.
    """

    n: int
    table: dict[frozenset[int], float]
    s: int = -1
    indices: frozenset[int] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("dimension n must be positive")
        table = {}
        for support, p in self.table.items():
            support = _as_index_set(support)
            p = float(p)
            if p < 0 or not math.isfinite(p):
                raise ModelError(f"probability of {sorted(support)} must be a finite number >= 0")
            if any(i < 0 or i >= self.n for i in support):
                raise ModelError(f"support {sorted(support)} has an index outside [0, {self.n})")
            if p > 0:
                table[support] = table.get(support, 0.0) + p
        total = math.fsum(table.values())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ModelError(f"support probabilities sum to {total!r}, expected 1")
        indices = frozenset(range(self.n)) if self.indices is None else frozenset(self.indices)
        for support in table:
            if not support <= indices:
                raise ModelError(f"support {sorted(support)} leaves the model's index set")
        largest = max((len(sup) for sup in table), default=0)
        s = self.s if self.s >= 0 else max(largest, 1)
        if largest > s:
            raise ModelError(f"support of size {largest} exceeds max sparsity s={s}")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "indices", indices)
        masks = tuple((sum(1 << i for i in sup), p) for sup, p in table.items())
        object.__setattr__(self, "_masks", masks)

    @classmethod
    def from_entries(cls, entries, n: int | None = None, s: int = -1) -> "ExplicitModel":
        table: dict[frozenset[int], float] = {}
        for support, p in entries:
            key = _as_index_set(support)
            table[key] = table.get(key, 0.0) + float(p)
        if n is None:
            n = max((max(sup) + 1 for sup in table if sup), default=1)
        return cls(n=n, table=table, s=s)

    def _mask_of(self, subset: frozenset[int]) -> int:
        return sum(1 << i for i in subset)

    def q_of(self, subset) -> float:
        subset = _as_index_set(subset)
        self._check_subset(subset)
        mask = self._mask_of(subset)
        return math.fsum(p for m, p in self._masks if m & mask)

    def prob_empty(self) -> float:
        return self.table.get(frozenset(), 0.0)

    def condition(self, omega) -> "ExplicitModel":
        omega = _as_index_set(omega)
        self._check_subset(omega)
        rows = {sup: p for sup, p in self.table.items() if omega <= sup}
        z = math.fsum(rows.values())
        if z <= 0:
            raise ModelError(
                f"cannot condition on {sorted(omega)}: the event has probability zero"
            )
        table = {sup - omega: p / z for sup, p in rows.items()}
        # renormalize away the rounding left by the division
        total = math.fsum(table.values())
        table = {sup: p / total for sup, p in table.items()}
        return ExplicitModel(
            n=self.n,
            table=table,
            s=max(self.s - len(omega), 0),
            indices=self.indices - omega,
        )

    def sample_support(self, rng: np.random.Generator) -> frozenset[int]:
        supports = list(self.table)
        probs = np.array([self.table[sup] for sup in supports])
        return supports[rng.choice(len(supports), p=probs / probs.sum())]

    def _leaf_state(self, i):
        return 1 << i

    def _join_state(self, a, b):
        return a | b

    def _state_q(self, mask) -> float:
        return math.fsum(p for m, p in self._masks if m & mask)


@dataclass(frozen=True, eq=False)
class MarginalModel(SupportModel):
    """Independent per-index activity probabilities ``p``."""

    n: int
    p: np.ndarray
    s: int
    indices: frozenset[int] | None = None
    label: str = "custom"

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (self.n,):
            raise ModelError(f"expected {self.n} activity probabilities, got shape {p.shape}")
        if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
            raise ModelError("activity probabilities must lie in [0, 1]")
        if self.s < 0 or self.s > self.n:
            raise ModelError(f"max sparsity s={self.s} must lie in [0, n={self.n}]")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(
            self, "indices", frozenset(range(self.n)) if self.indices is None else frozenset(self.indices)
        )
        # log(1 - p_i); activity of a set is 1 - exp(sum of these)
        with np.errstate(divide="ignore"):
            object.__setattr__(self, "_log_off", np.log1p(-p))
        live = np.zeros(self.n, dtype=bool)
        live[list(self.indices)] = True
        object.__setattr__(self, "_live", live)

    def index_array(self) -> np.ndarray:
        """The live index set as a sorted int64 array."""
        return np.flatnonzero(self._live)

    @classmethod
    def uniform(cls, n: int, s: int) -> "MarginalModel":
        return cls(n=n, p=np.full(n, s / n), s=s, label="uniform")

    @classmethod
    def exponential(cls, n: int, s: int, mean: float = 10.0) -> "MarginalModel":
        """Activity proportional to the exponential pdf at positions 1..n.

        The weights are scaled so they sum to ``s`` and clipped at 1.
        """
        pos = np.arange(1, n + 1)
        w = np.exp(-(pos - 1) / mean)
        p = np.minimum(s * w / w.sum(), 1.0)
        return cls(n=n, p=p, s=s, label=f"exponential(mean={mean:g})")

    def q_of(self, subset) -> float:
        subset = _as_index_set(subset)
        self._check_subset(subset)
        if not subset:
            return 0.0
        return float(-np.expm1(self._log_off[list(subset)].sum()))

    def prob_empty(self) -> float:
        return float(np.exp(self._log_off[self._live].sum()))

    def condition(self, omega) -> "MarginalModel":
        omega = _as_index_set(omega)
        self._check_subset(omega)
        # independence: the remaining activities are unchanged
        out = object.__new__(MarginalModel)
        for name, value in vars(self).items():
            object.__setattr__(out, name, value)
        object.__setattr__(out, "s", max(self.s - len(omega), 0))
        object.__setattr__(out, "indices", self.indices - omega)
        live = self._live.copy()
        live[list(omega)] = False
        object.__setattr__(out, "_live", live)
        return out

    def _leaf_state(self, i):
        return float(self._log_off[i])

    def _join_state(self, a, b):
        return a + b

    def _state_q(self, log_off) -> float:
        return -math.expm1(log_off)


def enumerate_supports(model: SupportModel, cap: int = ENUMERATION_CAP):
    """All supports with positive probability, as ``(frozenset, p)`` pairs.

    Marginal models are expanded into their product law, so they are only
    accepted while the live index set is at most ``cap``.
    """
    if isinstance(model, ExplicitModel):
        if len(model.indices) > cap:
            raise UnsupportedOperation(f"{len(model.indices)} indices exceed the enumeration cap {cap}")
        return sorted(model.table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
    if isinstance(model, MarginalModel):
        idx = sorted(model.indices)
        if len(idx) > cap:
            raise UnsupportedOperation(
                f"marginal model with {len(idx)} indices exceeds the enumeration cap {cap}"
            )
        out = []
        for k in range(len(idx) + 1):
            for combo in itertools.combinations(idx, k):
                chosen = set(combo)
                prob = math.prod(model.p[i] if i in chosen else 1 - model.p[i] for i in idx)
                if prob > 0:
                    out.append((frozenset(combo), prob))
        return out
    raise UnsupportedOperation(f"cannot enumerate {type(model).__name__}")


def random_explicit(
    n: int,
    s: int,
    rng: np.random.Generator,
    *,
    allow_empty: bool = True,
    keep: float | None = None,
) -> ExplicitModel:
    """Random s-sparse table over ``range(n)``.

    Each admissible support is kept with probability ``keep`` (drawn at random
    when omitted) and given a Dirichlet weight.
    """
    supports = [
        frozenset(c)
        for k in range(0 if allow_empty else 1, s + 1)
        for c in itertools.combinations(range(n), k)
    ]
    keep = rng.uniform(0.05, 1.0) if keep is None else keep
    chosen = [sup for sup in supports if rng.random() < keep]
    if not chosen:
        chosen = [supports[rng.integers(len(supports))]]
    alpha = rng.choice([0.2, 1.0, 5.0])
    weights = rng.dirichlet(np.full(len(chosen), alpha))
    weights = np.maximum(weights, 1e-300)
    weights /= weights.sum()
    return ExplicitModel(n=n, table=dict(zip(chosen, weights)), s=s)


def _int_field(doc: dict, name: str) -> int:
    if name not in doc:
        raise ModelError(f"marginal.{name} is required")
    value = doc[name]
    if not isinstance(value, int) or isinstance(value, bool):
        raise ModelError(f"marginal.{name} must be an integer, got {value!r}")
    return value


def model_from_spec(spec: dict, n: int | None = None, s: int | None = None) -> SupportModel:
    """Build a model from its JSON form.

    ``{"explicit": [{"support": [...], "p": ...}, ...], "n": ..., "s": ...}`` or
    ``{"marginal": {"n": ..., "s": ..., "position_pdf": "uniform"|"exponential", "mean": ...}}``.
    ``n`` and ``s`` override the marginal parameters (used by sweeps).
    """
    if not isinstance(spec, dict):
        raise ModelError("model spec must be an object")
    if "explicit" in spec:
        rows = spec["explicit"]
        if not isinstance(rows, list):
            raise ModelError("'explicit' must be a list of {support, p} entries")
        entries = []
        for k, row in enumerate(rows):
            if not isinstance(row, dict) or "support" not in row or "p" not in row:
                raise ModelError(f"explicit[{k}] needs fields 'support' and 'p'")
            sup, p = row["support"], row["p"]
            if not isinstance(sup, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in sup):
                raise ModelError(f"explicit[{k}].support must be a list of integer indices")
            if not isinstance(p, (int, float)) or isinstance(p, bool):
                raise ModelError(f"explicit[{k}].p must be a number, got {p!r}")
            entries.append((sup, p))
        n_, s_ = spec.get("n"), spec.get("s", -1)
        for name, value in (("n", n_), ("s", s_)):
            if value is not None and (not isinstance(value, int) or isinstance(value, bool)):
                raise ModelError(f"{name} must be an integer, got {value!r}")
        return ExplicitModel.from_entries(entries, n=n_, s=s_)
    if "marginal" in spec:
        m = spec["marginal"]
        if not isinstance(m, dict):
            raise ModelError("'marginal' must be an object")
        unknown = set(m) - {"n", "s", "position_pdf", "mean"}
        if unknown:
            raise ModelError(f"marginal: unknown fields {sorted(unknown)}")
        n_ = n if n is not None else _int_field(m, "n")
        s_ = s if s is not None else _int_field(m, "s")
        if n_ < 1:
            raise ModelError(f"marginal.n must be >= 1, got {n_}")
        pdf = m.get("position_pdf", "uniform")
        if pdf == "uniform":
            return MarginalModel.uniform(n_, s_)
        if pdf == "exponential":
            mean = m.get("mean", 10.0)
            if not isinstance(mean, (int, float)) or isinstance(mean, bool) or not mean > 0:
                raise ModelError(f"marginal.mean must be a positive number, got {mean!r}")
            return MarginalModel.exponential(n_, s_, float(mean))
        raise ModelError(f"marginal.position_pdf must be 'uniform' or 'exponential', got {pdf!r}")
    raise ModelError("model spec needs an 'explicit' or 'marginal' field")


def model_to_spec(model: SupportModel) -> dict:
    if isinstance(model, ExplicitModel):
        rows = [{"support": sorted(sup), "p": p} for sup, p in enumerate_supports(model, cap=10**9)]
        return {"explicit": rows, "n": model.n, "s": model.s}
    raise UnsupportedOperation("only explicit models serialize losslessly")


def load_model(path) -> SupportModel:
    try:
        spec = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not valid JSON ({exc})") from None
    return model_from_spec(spec)


# Four-index, 2-sparse worked example (indices 0..3).
WORKED_EXAMPLE_TABLE = {
    (): 0.02,
    (0,): 0.07,
    (1,): 0.05,
    (2,): 0.03,
    (3,): 0.10,
    (0, 1): 0.31,
    (0, 2): 0.20,
    (0, 3): 0.03,
    (1, 2): 0.06,
    (1, 3): 0.12,
    (2, 3): 0.01,
}


def worked_example_model() -> ExplicitModel:
    return ExplicitModel.from_entries(WORKED_EXAMPLE_TABLE.items(), n=4, s=2)
