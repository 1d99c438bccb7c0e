"""Dependable per-leaf uncertainties from held-out calibration data.

Each leaf's uncertainty becomes the one-sided Clopper-Pearson upper bound on
its incorrect rate at the requested confidence level, with fractional
(membership-weighted) counts allowed.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

from scipy.special import betainc

from .core import Dataset, one_hot_encode
from .errors import BadArguments, EmptyCalibrationSet, SchemaMismatch
from .trees import QualityImpactModel


@dataclass(frozen=True)
class CalibrationConfig:
    confidence_level: float = 0.9999
    fallback_u: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.confidence_level < 1.0:
            raise BadArguments(f"confidence level must lie in (0, 1), got {self.confidence_level}")
        if not 0.0 <= self.fallback_u <= 1.0:
            raise BadArguments(f"fallback_u must lie in [0, 1], got {self.fallback_u}")


@dataclass(frozen=True)
class LeafCalibrationRecord:
    leaf_id: str
    weighted_incorrect: float
    weighted_total: float
    upper_bound: float


def cp_upper(k: float, n: float, cl: float, tol: float = 1e-10) -> float:
    """Smallest p with BetaCDF(p; k+1, n-k) >= cl, by bisection."""
    k, n, cl = float(k), float(n), float(cl)
    if k < 0 or n < 0 or k > n or not 0.0 < cl < 1.0:
        raise BadArguments(f"cp_upper needs 0 <= k <= n and 0 < cl < 1, got k={k}, n={n}, cl={cl}")
    if n == 0 or k >= n:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if betainc(k + 1.0, n - k, mid) >= cl:
            hi = mid
        else:
            lo = mid
    return hi


def calibrate_model(m: QualityImpactModel, cal: Dataset, cfg: CalibrationConfig | None = None) -> QualityImpactModel:
    """New model whose leaves carry calibrated upper bounds; the input model is untouched.

    Ensemble members are calibrated one by one on the full calibration set.
    """
    cfg = cfg or CalibrationConfig()
    if cal.schema != m.schema:
        raise SchemaMismatch("calibration data schema differs from the model schema")
    if len(cal) == 0:
        raise EmptyCalibrationSet("calibration set is empty")
    if cal.labels is None:
        raise EmptyCalibrationSet("calibration set has no labels")
    enc = one_hot_encode(cal)
    out = copy.deepcopy(m)
    for tree in out.trees:
        sums = {leaf.id: [0.0, 0.0] for leaf in tree.leaves}
        for leaf, idx, w in tree.iter_leaf_weights(enc.X):
            s = sums[leaf.id]
            s[0] += float(w.sum())
            s[1] += float(w @ enc.y[idx])
        for leaf in tree.leaves:
            total, incorrect = sums[leaf.id]
            incorrect = min(incorrect, total)
            leaf.stats.calibration_n = total
            leaf.stats.calibration_incorrect = incorrect
            leaf.stats.calibrated_u = (
                cp_upper(incorrect, total, cfg.confidence_level) if total > 0 else cfg.fallback_u
            )
    out.calibration = {"confidence_level": cfg.confidence_level, "fallback_u": cfg.fallback_u}
    return out


def calibration_records(m: QualityImpactModel) -> list[LeafCalibrationRecord]:
    recs = []
    for t, tree in enumerate(m.trees):
        for leaf in tree.leaves:
            s = leaf.stats
            if s.calibrated_u is None:
                continue
            recs.append(LeafCalibrationRecord(f"t{t}/n{leaf.id}", s.calibration_incorrect, s.calibration_n, s.calibrated_u))
    return recs
