"""Additive measurement noise, threshold choice and error predictors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NOISE_KINDS = ("none", "uniform", "gaussian")


@dataclass(frozen=True)
class NoiseSpec:
    """Independent additive noise per measurement.

    ``uniform`` draws ``level * (U(0,1) - 0.5)``, so ``level`` is the full width
    of the interval.  ``gaussian`` draws ``N(0, level)``.
    """

    kind: str = "none"
    level: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if not self.level >= 0:
            raise ValueError("noise level must be >= 0")
        if self.kind == "none" and self.level != 0:
            raise ValueError("noise kind 'none' takes no level")

    @property
    def silent(self) -> bool:
        return self.kind == "none" or self.level == 0

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "uniform":
            return self.level * (rng.random() - 0.5)
        if self.kind == "gaussian":
            return rng.normal(0.0, self.level)
        return 0.0

    @classmethod
    def parse(cls, text: str) -> "NoiseSpec":
        """``none``, ``uniform:0.1`` or ``gaussian:0.5``."""
        kind, _, level = text.partition(":")
        return cls(kind.strip(), float(level) if level else 0.0)

    @classmethod
    def coerce(cls, value) -> "NoiseSpec":
        """Accept a spec, a ``parse`` string or a ``{"kind", "level"}`` mapping."""
        if isinstance(value, cls):
            return value
        if value is None:
            return cls()
        if isinstance(value, str):
            try:
                return cls.parse(value)
            except ValueError as exc:
                raise ValueError(f"noise: {exc}") from None
        if isinstance(value, dict):
            unknown = set(value) - {"kind", "level"}
            if unknown:
                raise ValueError(f"noise: unknown fields {sorted(unknown)}")
            level = value.get("level", 0.0)
            if not isinstance(level, (int, float)) or isinstance(level, bool):
                raise ValueError("noise.level must be a number")
            return cls(value.get("kind", "none"), float(level))
        raise ValueError(f"noise: expected a string or mapping, got {type(value).__name__}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "level": self.level}


THRESHOLD_RULES = ("mean_abs", "max_abs")


def threshold_for(noise: NoiseSpec, rule: str = "mean_abs") -> float:
    """Branch threshold: ``E|eta|`` by default, ``sup |eta|`` with ``rule="max_abs"``.

    The sup rule exists only for bounded (uniform) noise.
    """
    if rule not in THRESHOLD_RULES:
        raise ValueError(f"unknown threshold rule {rule!r}; expected one of {THRESHOLD_RULES}")
    if rule == "max_abs":
        if noise.kind == "gaussian":
            raise ValueError("gaussian noise is unbounded; 'max_abs' needs uniform noise")
        return noise.level / 2 if noise.kind == "uniform" else 0.0
    if noise.kind == "gaussian":
        return 2 * noise.level / math.sqrt(2 * math.pi)
    if noise.kind == "uniform":
        return noise.level / 4
    return 0.0


def predict_single_error(sigma_eta: float, sigma_x: float) -> float:
    """Closed-form misclassification probability of one thresholded sample.

    Signal ``N(0, sigma_x)``, noise ``N(0, sigma_eta)``, threshold ``E|eta|``.
    """
    if not sigma_x > 0:
        raise ValueError("sigma_x must be positive")
    if sigma_eta < 0:
        raise ValueError("sigma_eta must be >= 0")
    sigma_y = math.hypot(sigma_x, sigma_eta)
    a = math.erf(sigma_eta / (math.sqrt(math.pi) * sigma_x))
    b = math.erf(sigma_eta / (math.sqrt(math.pi) * sigma_y))
    return a + b - a * b


def single_error_expansion(t: float) -> float:
    """Leading term ``4t/pi`` of the single-sample error for small ``t``."""
    return 4 * t / math.pi


def predict_recovery_error(p_single: float, s: int, n: int) -> float:
    """Probability of at least one error over ``s (log2 n + 1)`` samples."""
    if not 0 <= p_single <= 1:
        raise ValueError("p_single must lie in [0, 1]")
    return 1 - (1 - p_single) ** (s * (math.log2(n) + 1))


def linearized_recovery_error(t: float, s: int, n: int) -> float:
    return s * (math.log2(n) + 1) * single_error_expansion(t)


@dataclass(frozen=True)
class ErrorPrediction:
    t: float
    p_single: float
    p_recovery: float
    p_recovery_linear: float


def predict(sigma_eta: float, sigma_x: float, s: int, n: int) -> ErrorPrediction:
    p = predict_single_error(sigma_eta, sigma_x)
    t = sigma_eta / sigma_x
    return ErrorPrediction(
        t=t,
        p_single=p,
        p_recovery=predict_recovery_error(p, s, n),
        p_recovery_linear=linearized_recovery_error(t, s, n),
    )


def simulate_single_error(
    sigma_eta: float, sigma_x: float, draws: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte-Carlo rate at which thresholding ``|X + eta|`` and ``|X|`` disagree.

    Returns ``(rate, standard_error)``.
    """
    T = threshold_for(NoiseSpec("gaussian", sigma_eta))
    x = rng.normal(0.0, sigma_x, draws)
    y = x + rng.normal(0.0, sigma_eta, draws)
    rate = float(np.mean((np.abs(x) < T) != (np.abs(y) < T)))
    return rate, math.sqrt(rate * (1 - rate) / draws)
