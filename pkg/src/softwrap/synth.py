"""Synthetic pedestrian-detection scenarios with a known error probability.

Stands in for simulator recordings plus detector correctness labels: each
point's label is a Bernoulli draw from ``true_probability``. All constants
below are frozen; changing them changes every downstream regression value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaincinv, expit

from . import rng
from .core import CATEGORICAL, CONTINUOUS, DataPoint, Dataset, FeatureSchema, FeatureSpec
from .errors import BadConfig, SchemaMismatch

SCENARIO_SCHEMA = FeatureSchema(
    (
        FeatureSpec("distance", CONTINUOUS, unit="m"),
        FeatureSpec("precipitation", CONTINUOUS, unit="percent"),
        FeatureSpec("fog", CONTINUOUS, unit="percent"),
        FeatureSpec("occlusion", CONTINUOUS, unit="fraction"),
        FeatureSpec("ped_type", CATEGORICAL, categories=("adult", "child", "cyclist")),
    ),
    "outcome_incorrect",
)

RANGES = {"distance": (0.0, 25.0), "precipitation": (0.0, 100.0), "fog": (0.0, 100.0), "occlusion": (0.0, 0.5)}
PED_TYPES = ("adult", "child", "cyclist")

INTERCEPT = -3.1
COEF = {"distance": 0.12, "precipitation": 0.010, "fog": 0.015, "occlusion": 3.0}
PED_SHIFT = {"adult": 0.0, "child": 0.6, "cyclist": 0.3}
P_MIN, P_MAX = 0.01, 0.99

REPRESENTATIVE_PED = (0.7, 0.15, 0.15)

MODES = ("uniform", "representative")


@dataclass(frozen=True)
class GeneratorConfig:
    mode: str = "uniform"
    n: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise BadConfig(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.n) < 1:
            raise BadConfig("n must be >= 1")


def true_probability_arrays(distance, precipitation, fog, occlusion, ped_type) -> np.ndarray:
    shift = np.array([PED_SHIFT[str(t)] for t in np.atleast_1d(ped_type)], dtype=np.float64)
    logit = (
        INTERCEPT
        + COEF["distance"] * np.asarray(distance, dtype=np.float64)
        + COEF["precipitation"] * np.asarray(precipitation, dtype=np.float64)
        + COEF["fog"] * np.asarray(fog, dtype=np.float64)
        + COEF["occlusion"] * np.asarray(occlusion, dtype=np.float64)
        + shift
    )
    return np.clip(expit(logit), P_MIN, P_MAX)


def true_probability(x: DataPoint) -> float:
    if len(x.values) != len(SCENARIO_SCHEMA.features):
        raise SchemaMismatch("point does not match the scenario schema")
    d, pr, fg, oc, pt = x.values
    if pt not in PED_TYPES:
        raise SchemaMismatch(f"unknown ped_type {pt!r}")
    return float(true_probability_arrays([d], [pr], [fg], [oc], [pt])[0])


def generate(cfg: GeneratorConfig) -> Dataset:
    """Draw ``cfg.n`` labeled scenarios; point i depends only on (seed, i)."""
    n = int(cfg.n)
    keys = rng.raw_stream(rng.derive_seed(cfg.seed, 0x5EED), np.arange(n, dtype=np.uint64))

    def u(j: int) -> np.ndarray:
        return rng.uniform(keys, np.full(n, j, dtype=np.uint64))

    if cfg.mode == "uniform":
        cols = {name: lo + (hi - lo) * u(j) for j, (name, (lo, hi)) in enumerate(RANGES.items())}
        ped = np.minimum((u(4) * 3).astype(np.int64), 2)
    else:
        distance = 25.0 * betaincinv(2.0, 2.0, u(0))
        precipitation = np.where(u(1) < 0.7, 0.0, np.minimum(-20.0 * np.log1p(-u(5)), 100.0))
        fog = np.where(u(2) < 0.85, 0.0, 60.0 * u(6))
        occlusion = 0.5 * (1.0 - (1.0 - u(3)) ** 0.25)
        cols = {"distance": distance, "precipitation": precipitation, "fog": fog, "occlusion": occlusion}
        cum = np.cumsum(REPRESENTATIVE_PED)
        ped = np.searchsorted(cum[:-1], u(4), side="right")
    ped_type = np.array(PED_TYPES, dtype=object)[ped]
    cols["ped_type"] = ped_type
    p = true_probability_arrays(cols["distance"], cols["precipitation"], cols["fog"], cols["occlusion"], ped_type)
    labels = u(7) < p
    return Dataset(
        SCENARIO_SCHEMA,
        cols,
        labels,
        None,
        provenance=f"synth:{cfg.mode}:n={n}:seed={cfg.seed}",
        truth=p,
    )
