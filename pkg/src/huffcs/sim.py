"""Signal generation and Monte-Carlo campaigns.

Every trial draws from its own generator seeded by ``(seed, point, trial)``,
so a campaign gives the same report whether it runs serially or split over
worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .model import ExplicitModel, SupportModel, model_from_spec
from .noise import NoiseSpec, threshold_for
from .recovery import CancellationError, MeasurementOracle, TreePlanner, recover

CSV_COLUMNS = (
    "sweep_value",
    "mean_count",
    "var_count",
    "mean_rel_err_pct",
    "median_rel_err_pct",
    "success_rate",
    "seconds",
)
SWEEP_VARIABLES = ("s", "N", "r")


@dataclass(frozen=True)
class SignalGenerator:
    """``s`` distinct positions from the position law, values ``A (U - 1/2)``.

    ``positions`` is ``"uniform"``, ``"exponential"`` (continuous draws with
    the given mean rounded up to 1..n) or ``"model"`` (supports drawn from an
    explicit model, which then also fixes ``s`` per draw).
    """

    n: int
    s: int
    amplitude: float = 1.0
    positions: str = "uniform"
    mean: float = 10.0
    model: ExplicitModel | None = None

    def __post_init__(self):
        if self.positions not in ("uniform", "exponential", "model"):
            raise ValueError(f"unknown position law {self.positions!r}")
        if self.positions == "model" and self.model is None:
            raise ValueError("position law 'model' needs an explicit model")
        if not 0 <= self.s <= self.n:
            raise ValueError(f"sparsity s={self.s} must lie in [0, n={self.n}]")

    def support(self, rng: np.random.Generator) -> list[int]:
        if self.positions == "model":
            return sorted(self.model.sample_support(rng))
        if self.positions == "uniform":
            return sorted(rng.choice(self.n, size=self.s, replace=False).tolist())
        chosen: set[int] = set()
        while len(chosen) < self.s:
            k = math.ceil(rng.exponential(self.mean))
            if 1 <= k <= self.n:
                chosen.add(k - 1)
        return sorted(chosen)

    def values(self, k: int, rng: np.random.Generator) -> np.ndarray:
        v = self.amplitude * (rng.random(k) - 0.5)
        while np.any(v == 0):
            zero = v == 0
            v[zero] = self.amplitude * (rng.random(int(zero.sum())) - 0.5)
        return v

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        x = np.zeros(self.n)
        sup = self.support(rng)
        x[sup] = self.values(len(sup), rng)
        return x


def generate_signal(gen: SignalGenerator, seed) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return gen.draw(rng)


def relative_error_pct(x_hat: np.ndarray, x: np.ndarray) -> float:
    """``100 ||x_hat - x|| / ||x||``; a zero signal scores 0 if matched, else 100."""
    norm = float(np.linalg.norm(x))
    diff = float(np.linalg.norm(x_hat - x))
    if norm == 0:
        return 0.0 if diff == 0 else 100.0
    return 100.0 * diff / norm


@dataclass
class CampaignConfig:
    """One experiment: a model, a signal law, a noise law and a sweep.

    ``model`` is the JSON model spec; marginal specs are re-instantiated at
    each sweep point with that point's ``n`` and ``s``.  ``threshold`` is a
    number, ``None`` (the expected absolute noise) or a rule name accepted by
    :func:`threshold_for`, re-evaluated at each sweep point.
    """

    model: dict
    n: int | None = None
    s: int | None = None
    amplitude: float = 1.0
    positions: str = "uniform"
    mean: float = 10.0
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    threshold: float | str | None = None
    trials: int = 1000
    sweep: str | None = None
    values: list = field(default_factory=list)
    seed: int = 0
    precheck: bool = True
    name: str = "campaign"

    def __post_init__(self):
        if not isinstance(self.model, dict):
            raise ValueError("model must be a model spec object")
        for name in ("n", "s", "trials", "seed"):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or isinstance(value, bool)):
                raise ValueError(f"{name} must be an integer, got {value!r}")
        for name in ("amplitude", "mean"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
                raise ValueError(f"{name} must be a positive number, got {value!r}")
        if not isinstance(self.precheck, bool):
            raise ValueError(f"precheck must be true or false, got {self.precheck!r}")
        if not isinstance(self.values, list):
            raise ValueError("sweep values must be a list")
        self.noise = NoiseSpec.coerce(self.noise)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if isinstance(self.threshold, str):
            threshold_for(self.noise, self.threshold)  # rejects unknown rules early
        elif self.threshold is not None and not self.threshold >= 0:
            raise ValueError("threshold must be nonnegative")
        if self.sweep is not None:
            if self.sweep not in SWEEP_VARIABLES:
                raise ValueError(f"sweep must be one of {SWEEP_VARIABLES}, got {self.sweep!r}")
            if not self.values:
                raise ValueError("a sweep needs at least one value")
            if self.sweep in ("s", "r") and "explicit" in self.model:
                raise ValueError("explicit models fix n and s; only N can be swept")

    @classmethod
    def from_dict(cls, doc: dict) -> "CampaignConfig":
        doc = dict(doc)
        if "model" not in doc:
            raise ValueError("campaign config needs a 'model' field")
        sweep = doc.pop("sweep", None)
        if isinstance(sweep, dict):
            doc["sweep"] = sweep.get("variable")
            doc["values"] = sweep.get("values", [])
        elif sweep is not None:
            doc["sweep"] = sweep
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown campaign config fields: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "CampaignConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["noise"] = self.noise.to_dict()
        out["sweep"] = {"variable": self.sweep, "values": list(self.values)} if self.sweep else None
        del out["values"]
        return out

    def points(self) -> list:
        return list(self.values) if self.sweep else [None]

    def resolve(self, value):
        """Model, generator, noise and threshold at one sweep point."""
        n, s, noise = self.n, self.s, self.noise
        if self.sweep == "s":
            s = int(value)
        elif self.sweep == "r":
            n = 2 ** int(value)
        elif self.sweep == "N":
            noise = NoiseSpec(noise.kind if noise.kind != "none" else "uniform", float(value))
        model = model_from_spec(self.model, n=n, s=s) if "marginal" in self.model else model_from_spec(self.model)
        if isinstance(model, ExplicitModel):
            gen = SignalGenerator(model.n, model.s, self.amplitude, "model", model=model)
        else:
            gen = SignalGenerator(model.n, model.s, self.amplitude, self.positions, self.mean)
        if self.threshold is None or isinstance(self.threshold, str):
            threshold = threshold_for(noise, self.threshold or "mean_abs")
        else:
            threshold = float(self.threshold)
        return model, gen, noise, threshold


@dataclass
class PointResult:
    sweep_value: object
    counts: np.ndarray
    rel_errors: np.ndarray
    success: np.ndarray
    exact: np.ndarray
    cancellations: int
    seconds: float

    @property
    def mean_count(self) -> float:
        return float(self.counts.mean())

    @property
    def var_count(self) -> float:
        return float(self.counts.var(ddof=1)) if len(self.counts) > 1 else 0.0

    @property
    def sem_count(self) -> float:
        return math.sqrt(self.var_count / len(self.counts))

    def summary(self) -> dict:
        return {
            "sweep_value": self.sweep_value,
            "mean_count": self.mean_count,
            "var_count": self.var_count,
            "mean_rel_err_pct": float(self.rel_errors.mean()),
            "median_rel_err_pct": float(np.median(self.rel_errors)),
            "success_rate": float(self.success.mean()),
            "seconds": self.seconds,
        }


@dataclass
class CampaignReport:
    config: CampaignConfig
    points: list[PointResult]

    def rows(self) -> list[dict]:
        return [p.summary() for p in self.points]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: row[k] for k in CSV_COLUMNS})
        return buf.getvalue()

    def to_dict(self) -> dict:
        rows = self.rows()
        for row, p in zip(rows, self.points):
            row["trials"] = len(p.counts)
            row["max_count"] = int(p.counts.max())
            row["exact_rate"] = float(p.exact.mean())
            row["cancellations"] = p.cancellations
        return {"config": self.config.to_dict(), "seed": self.config.seed, "points": rows}


def _run_trials(config: CampaignConfig, point: int, trials: range):
    model, gen, noise, threshold = config.resolve(config.points()[point])
    planner = TreePlanner(model, maxsize=32)
    out = []
    for trial in trials:
        rng = np.random.default_rng([config.seed, point, trial])
        x = gen.draw(rng)
        oracle = MeasurementOracle(x, noise, rng)
        cancelled = False
        try:
            res = recover(model, oracle, threshold=threshold, precheck=config.precheck, planner=planner)
        except CancellationError as exc:
            res, cancelled = exc.result, True
        x_hat = res.x_hat
        out.append((
            oracle.count,
            relative_error_pct(x_hat, x),
            not cancelled and set(np.flatnonzero(x_hat)) == set(np.flatnonzero(x)),
            not cancelled and bool(np.array_equal(x_hat, x)),
            cancelled,
        ))
    return out


def run_campaign(config: CampaignConfig, workers: int = 1) -> CampaignReport:
    """Run ``config.trials`` recoveries at every sweep point."""
    points = []
    for k, value in enumerate(config.points()):
        t0 = time.perf_counter()
        if workers > 1:
            chunks = np.array_split(np.arange(config.trials), workers)
            with ProcessPoolExecutor(workers) as pool:
                futures = [
                    pool.submit(_run_trials, config, k, range(int(c[0]), int(c[-1]) + 1))
                    for c in chunks if len(c)
                ]
                rows = [row for f in futures for row in f.result()]
        else:
            rows = _run_trials(config, k, range(config.trials))
        counts, errs, success, exact, cancelled = map(np.array, zip(*rows))
        points.append(PointResult(
            sweep_value=value,
            counts=counts.astype(np.int64),
            rel_errors=errs.astype(float),
            success=success.astype(bool),
            exact=exact.astype(bool),
            cancellations=int(cancelled.sum()),
            seconds=time.perf_counter() - t0,
        ))
    return CampaignReport(config, points)


def fit_trend(xs, ys) -> tuple[float, float, float]:
    """Least-squares line through ``(xs, ys)``: ``(slope, intercept, R^2)``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 3:
        raise ValueError("need at least 3 paired points")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise ValueError("x values must not all be equal")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def benchmark(n: int = 1024, s_values=(1, 25, 50, 75, 100, 125, 150), trials: int = 20, seed: int = 0):
    """Mean wall-clock seconds per noiseless recovery for each sparsity."""
    warm = model_from_spec({"marginal": {"n": 4, "s": 1, "position_pdf": "uniform"}})
    recover(warm, MeasurementOracle(np.eye(4)[0]))  # load the compiled kernel outside the timings
    out = []
    for s in s_values:
        model = model_from_spec({"marginal": {"n": n, "s": s, "position_pdf": "uniform"}})
        gen = SignalGenerator(n, s, amplitude=1.0)
        rng = np.random.default_rng([seed, s])
        signals = [gen.draw(rng) for _ in range(trials)]
        t0 = time.perf_counter()
        for x in signals:
            recover(model, MeasurementOracle(x))
        out.append((s, (time.perf_counter() - t0) / trials))
    return out


def benchmark_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["s", "seconds_per_recovery"])
    writer.writerows(rows)
    return buf.getvalue()
