"""Final linear interdependency model: container, prediction, JSON I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelInputError

FITTED = "fitted"
PUBLISHED_FIXTURE = "paper-fixture"

# Transport value explained by energy, waste, communication, water and the
# three representative product groups (printing, textiles, mining).
PUBLISHED_PREDICTORS = ("energy", "waste", "communication", "water", "C18", "C13-15", "B")
PUBLISHED_COEFFICIENTS = (1.299, 1.739, 1.687, 1.735, 1.947, 5.131, 0.546)
PUBLISHED_INTERCEPT = 30507.785
PUBLISHED_R_SQUARED = 0.983


@dataclass(frozen=True)
class LinearModel:
    predictors: tuple[str, ...]
    coefficients: tuple[float, ...]
    intercept: float
    r_squared: float | None = None
    vifs: tuple[float, ...] = ()
    provenance: str = FITTED
    m: int | None = None
    units: str = "table units"
    labels: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "predictors", tuple(self.predictors))
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "vifs", tuple(float(v) for v in self.vifs))
        if len(self.predictors) != len(self.coefficients):
            raise ValueError("one coefficient per predictor required")
        if self.r_squared is not None and not 0.0 <= self.r_squared <= 1.0:
            raise ValueError(f"r_squared {self.r_squared} outside [0, 1]")

    @property
    def p(self) -> int:
        return len(self.coefficients)

    def to_dict(self) -> dict:
        return {
            "predictors": list(self.predictors),
            "coefficients": list(self.coefficients),
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "vifs": ["inf" if math.isinf(v) else v for v in self.vifs],
            "provenance": self.provenance,
            "m": self.m,
            "p": self.p,
            "units": self.units,
            "labels": dict(self.labels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        return cls(
            predictors=tuple(d["predictors"]),
            coefficients=tuple(d["coefficients"]),
            intercept=d["intercept"],
            r_squared=d.get("r_squared"),
            vifs=tuple(float(v) for v in d.get("vifs", ())),
            provenance=d.get("provenance", FITTED),
            m=d.get("m"),
            units=d.get("units", "table units"),
            labels=d.get("labels", {}),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LinearModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def published_model() -> LinearModel:
    return LinearModel(
        predictors=PUBLISHED_PREDICTORS,
        coefficients=PUBLISHED_COEFFICIENTS,
        intercept=PUBLISHED_INTERCEPT,
        r_squared=PUBLISHED_R_SQUARED,
        provenance=PUBLISHED_FIXTURE,
        labels={
            "energy": "Energy (aggregated)",
            "waste": "Waste (aggregated)",
            "communication": "Communication (aggregated)",
            "water": "Water (aggregated)",
            "C18": "Printing and reproduction of recorded media",
            "C13-15": "Textiles, wearing apparel and leather products",
            "B": "Mining and quarrying",
        },
    )


def predict(model: LinearModel, inputs) -> float:
    """``intercept + coefficients . inputs``."""
    x = np.asarray(inputs, dtype=float)
    if x.shape != (model.p,):
        raise ModelInputError(f"expected {model.p} inputs, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ModelInputError("inputs must be finite")
    return float(model.intercept + np.dot(model.coefficients, x))
