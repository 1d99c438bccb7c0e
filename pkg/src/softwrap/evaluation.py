"""Brier score with its Murphy decomposition, softness sweeps and model selection."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import CONTINUOUS, DataPoint, encode_point
from .errors import BadArguments, BadRange, Empty, LengthMismatch, NotContinuousFeature, SchemaError
from .trees import QualityImpactModel

UNIQUE_LIMIT = 1000
DEFAULT_BINS = 100
DEFAULT_JUMP_TAU = 0.02


@dataclass(frozen=True)
class BrierReport:
    bs: float
    var: float
    res: float
    uns: float
    unr: float
    oconf: float
    n_points: int
    binning: str  # "unique" or "fixed(k)"
    identity_residual: float

    def as_row(self) -> dict:
        return {
            "bs": self.bs,
            "var": self.var,
            "res": self.res,
            "uns": self.uns,
            "unr": self.unr,
            "oconf": self.oconf,
            "n_points": self.n_points,
            "binning": self.binning,
            "identity_residual": self.identity_residual,
        }


def _check(forecasts, outcomes) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(forecasts, dtype=np.float64).ravel()
    y = np.asarray(outcomes, dtype=np.float64).ravel()
    if f.size != y.size:
        raise LengthMismatch(f"{f.size} forecasts vs {y.size} outcomes")
    if f.size == 0:
        raise Empty("no forecasts")
    if np.any((f < 0) | (f > 1)) or not np.all(np.isfinite(f)):
        raise BadArguments("forecasts must lie in [0, 1]")
    return f, y


def brier_score(forecasts, outcomes) -> float:
    f, y = _check(forecasts, outcomes)
    return float(np.mean((f - y) ** 2))


def decompose(forecasts, outcomes, binning: str | int = "auto") -> BrierReport:
    """Murphy decomposition bs = var - res + unr.

    ``binning`` is "unique" (one group per distinct forecast value), an
    integer k (equal-width bins over [0, 1], each represented by its mean
    forecast) or "auto" (unique up to 1000 distinct values, else 100 bins).
    """
    f, y = _check(forecasts, outcomes)
    n = f.size
    if binning == "auto":
        binning = "unique" if np.unique(f).size <= UNIQUE_LIMIT else DEFAULT_BINS
    if binning == "unique":
        _, groups = np.unique(f, return_inverse=True)
        label = "unique"
    else:
        k = int(binning)
        if k < 1:
            raise BadArguments("bin count must be >= 1")
        groups = np.minimum((f * k).astype(np.int64), k - 1)
        label = f"fixed({k})"
    counts = np.bincount(groups).astype(np.float64)
    used = counts > 0
    nk = counts[used]
    fk = np.bincount(groups, weights=f)[used] / nk
    pk = np.bincount(groups, weights=y)[used] / nk
    pbar = float(y.mean())
    var = pbar * (1.0 - pbar)
    res = float(np.sum(nk * (pk - pbar) ** 2) / n)
    gap = nk * (fk - pk) ** 2
    unr = float(np.sum(gap) / n)
    oconf = float(np.sum(gap[fk < pk]) / n)
    bs = float(np.mean((f - y) ** 2))
    return BrierReport(bs, var, res, var - res, unr, oconf, n, label, abs(bs - (var - res + unr)))


@dataclass(frozen=True)
class SweepResult:
    feature: str
    grid: np.ndarray
    u_values: np.ndarray

    @property
    def max_jump(self) -> float:
        return float(np.max(np.abs(np.diff(self.u_values))))

    def jump_count(self, tau: float = DEFAULT_JUMP_TAU) -> int:
        return int(np.sum(np.abs(np.diff(self.u_values)) > tau))

    def to_csv(self) -> str:
        lines = [f"{self.feature},uncertainty"]
        lines += [f"{g!r},{u!r}" for g, u in zip(self.grid.tolist(), self.u_values.tolist())]
        return "\n".join(lines) + "\n"


def sweep(m: QualityImpactModel, base: DataPoint | dict, feature: str, lo: float, hi: float, steps: int) -> SweepResult:
    """Estimates at ``base`` with one continuous feature moved over an even grid."""
    try:
        spec = m.schema.feature(feature)
    except KeyError:
        raise NotContinuousFeature(f"unknown feature {feature!r}") from None
    if spec.kind != CONTINUOUS:
        raise NotContinuousFeature(f"feature {feature!r} is {spec.kind}")
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi) or int(steps) < 2:
        raise BadRange(f"need lo < hi and steps >= 2, got lo={lo}, hi={hi}, steps={steps}")
    steps = int(steps)
    values = dict(zip(m.schema.names, base.values)) if isinstance(base, DataPoint) else dict(base)
    values[feature] = lo
    x0 = encode_point(m.schema, values)
    grid = lo + np.arange(steps) * ((hi - lo) / (steps - 1))
    grid[-1] = hi
    col = [c.name for c in m.columns].index(feature)
    X = np.repeat(x0[None, :], steps, axis=0)
    X[:, col] = grid
    return SweepResult(feature, grid, m.predict(X))


def select_best(reports: Sequence[tuple[str, BrierReport]], eps: float = 1e-3) -> str:
    """Lowest bs; within ``eps`` of it, lowest unr; then lowest model id."""
    if not reports:
        raise Empty("no reports to select from")
    best_bs = min(r.bs for _, r in reports)
    ties = [(r.unr, mid) for mid, r in reports if r.bs <= best_bs + eps]
    return min(ties)[1]


COLUMNS = ("bs", "var", "uns", "unr", "oconf")


def table_number(v: float) -> str:
    """Five decimals without the leading zero (".12176"); tiny values in exponent form."""
    if v != 0.0 and abs(v) < 5e-6:
        return f"{v:.1e}"
    s = f"{v:.5f}"
    if s.startswith("0."):
        return s[1:]
    if s.startswith("-0."):
        return "-" + s[2:]
    return s


def render_report(reports: Sequence[tuple[str, BrierReport]]) -> str:
    width = max([len("Approach")] + [len(mid) for mid, _ in reports])
    lines = ["  ".join([f"{'Approach':<{width}}"] + [f"{c:>8}" for c in COLUMNS])]
    for mid, r in reports:
        cells = [table_number(getattr(r, c)) for c in COLUMNS]
        lines.append("  ".join([f"{mid:<{width}}"] + [f"{c:>8}" for c in cells]))
    return "\n".join(lines) + "\n"


REPORT_FIELDS = ("model_id", "bs", "var", "res", "uns", "unr", "oconf", "n_points", "binning", "identity_residual")


def reports_to_csv(reports: Sequence[tuple[str, BrierReport]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    for mid, r in reports:
        row = r.as_row()
        w.writerow([mid] + [repr(row[k]) if isinstance(row[k], float) else row[k] for k in REPORT_FIELDS[1:]])
    return buf.getvalue()


def reports_from_csv(text: str) -> list[tuple[str, BrierReport]]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        try:
            out.append(
                (
                    row["model_id"],
                    BrierReport(
                        *(float(row[k]) for k in ("bs", "var", "res", "uns", "unr", "oconf")),
                        n_points=int(row["n_points"]),
                        binning=row["binning"],
                        identity_residual=float(row["identity_residual"]),
                    ),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"malformed report row: {exc}") from exc
    return out
