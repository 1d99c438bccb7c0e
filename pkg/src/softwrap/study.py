"""End-to-end comparison of the six approaches on synthetic scenario data.

Steps: build datasets (uniform training data, representative data split into
calibration and evaluation parts), train one model per approach, calibrate
it, evaluate it with the Brier decomposition, and sweep distance for a fixed
base scenario.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import rng
from .calibration import CalibrationConfig, calibrate_model
from .core import Dataset, EncodedDataset, atomic_write_text, one_hot_encode, save_dataset, save_schema, split_dataset
from .evaluation import BrierReport, SweepResult, decompose, render_report, reports_to_csv, select_best, sweep
from .fuzzy_trees import train_fuzzy_dt, train_fuzzy_rf
from .hard_trees import train_dt, train_rf
from .persist import save_model
from .soft_trees import train_bagged_soft_dt, train_soft_dt
from .synth import SCENARIO_SCHEMA, GeneratorConfig, generate
from .trees import APPROACHES, DISPLAY_NAMES, QualityImpactModel, TreeHyperparams

log = logging.getLogger(__name__)

TRAINERS: dict[str, Callable[[EncodedDataset, TreeHyperparams, int], QualityImpactModel]] = {
    "dt": lambda ds, hp, seed: train_dt(ds, hp),
    "rf": train_rf,
    "fuzzy-dt": train_fuzzy_dt,
    "fuzzy-rf": train_fuzzy_rf,
    "soft-dt": train_soft_dt,
    "bagged-soft-dt": train_bagged_soft_dt,
}

# Fixed study defaults. Soft trees fit a gate by gradient descent at every
# node and route every point down both branches, so their depth and ensemble
# size are capped to keep a 50k-point study within minutes on one core.
STUDY_HYPERPARAMS: dict[str, TreeHyperparams] = {
    "dt": TreeHyperparams(max_depth=8),
    "rf": TreeHyperparams(max_depth=8, n_trees=20),
    "fuzzy-dt": TreeHyperparams(max_depth=8),
    "fuzzy-rf": TreeHyperparams(max_depth=8, n_trees=20),
    "soft-dt": TreeHyperparams(max_depth=5),
    "bagged-soft-dt": TreeHyperparams(max_depth=5, n_trees=10),
}

GRID_DEPTHS = (4, 6, 8)
GRID_TREES = (10, 20)
ENSEMBLES = {"rf", "fuzzy-rf", "bagged-soft-dt"}

SWEEP_BASE = {"distance": 12.5, "precipitation": 0.0, "fog": 0.0, "occlusion": 0.1, "ped_type": "adult"}
SWEEP_FEATURE = "distance"
SWEEP_RANGE = (0.0, 25.0)
SWEEP_STEPS = 10_000


def train_model(approach: str, ds: EncodedDataset, hp: TreeHyperparams | None = None, seed: int = 0) -> QualityImpactModel:
    if approach not in TRAINERS:
        raise KeyError(approach)
    return TRAINERS[approach](ds, hp or TreeHyperparams(), seed)


def build_datasets(train_n: int, cal_n: int, eval_n: int, seed: int) -> tuple[Dataset, Dataset, Dataset]:
    train = generate(GeneratorConfig("uniform", train_n, rng.derive_seed(seed, 1)))
    rep = generate(GeneratorConfig("representative", cal_n + eval_n, rng.derive_seed(seed, 2)))
    total = cal_n + eval_n
    cal, ev = split_dataset(rep, [cal_n / total, eval_n / total], rng.derive_seed(seed, 3))
    return train, cal, ev


@dataclass
class StudyResult:
    reports: list[tuple[str, BrierReport]]
    binned_reports: list[tuple[str, BrierReport]]
    models: dict[str, QualityImpactModel]
    sweeps: dict[str, SweepResult]
    sweeps_fine: dict[str, SweepResult]
    best: str
    selections: dict[str, str] = field(default_factory=dict)

    def report(self, approach: str) -> BrierReport:
        return dict(self.reports)[DISPLAY_NAMES[approach]]


def run_study(
    train_n: int = 50_000,
    cal_n: int = 20_000,
    eval_n: int = 20_000,
    seed: int = 1,
    out_dir: str | Path | None = None,
    grid: bool = False,
    binning: str | int = "unique",
    cl: float = 0.9999,
    approaches=APPROACHES,
) -> StudyResult:
    train, cal, ev = build_datasets(train_n, cal_n, eval_n, seed)
    enc = one_hot_encode(train)
    ev_enc = one_hot_encode(ev)
    cfg = CalibrationConfig(cl)
    models, reports, binned, selections = {}, [], [], {}
    for i, approach in enumerate(approaches):
        mseed = rng.derive_seed(seed, 100 + i)
        candidates = []
        for hp in _hyperparam_candidates(approach, grid):
            log.info("training %s (depth %d, trees %d)", approach, hp.max_depth, hp.n_trees)
            m = calibrate_model(train_model(approach, enc, hp, mseed), cal, cfg)
            forecasts = m.predict(ev_enc.X)
            mid = f"{approach}:d{hp.max_depth}" + (f":t{hp.n_trees}" if approach in ENSEMBLES else "")
            candidates.append((mid, m, decompose(forecasts, ev_enc.y, binning), decompose(forecasts, ev_enc.y, 100)))
        chosen = select_best([(mid, r) for mid, _, r, _ in candidates])
        selections[approach] = chosen
        mid, m, rep, rep_binned = next(c for c in candidates if c[0] == chosen)
        models[approach] = m
        reports.append((DISPLAY_NAMES[approach], rep))
        binned.append((DISPLAY_NAMES[approach], rep_binned))
    sweeps = {a: sweep(m, SWEEP_BASE, SWEEP_FEATURE, *SWEEP_RANGE, SWEEP_STEPS) for a, m in models.items()}
    fine = {a: sweep(m, SWEEP_BASE, SWEEP_FEATURE, *SWEEP_RANGE, 2 * SWEEP_STEPS) for a, m in models.items()}
    result = StudyResult(reports, binned, models, sweeps, fine, select_best(reports), selections)
    if out_dir is not None:
        write_study(result, Path(out_dir), train, cal, ev)
    return result


def _hyperparam_candidates(approach: str, grid: bool) -> list[TreeHyperparams]:
    base = STUDY_HYPERPARAMS[approach]
    if not grid:
        return [base]
    trees = GRID_TREES if approach in ENSEMBLES else (base.n_trees,)
    return [base.updated(max_depth=d, n_trees=t) for d in GRID_DEPTHS for t in trees]


def softness_csv(result: StudyResult) -> str:
    lines = ["approach,steps,max_jump,max_jump_double_steps,shrink_factor,jump_count"]
    for a, sw in result.sweeps.items():
        fine = result.sweeps_fine[a].max_jump
        shrink = sw.max_jump / fine if fine > 0 else float("inf")
        lines.append(f"{a},{len(sw.grid)},{sw.max_jump!r},{fine!r},{shrink!r},{sw.jump_count()}")
    return "\n".join(lines) + "\n"


def write_study(result: StudyResult, out: Path, train: Dataset, cal: Dataset, ev: Dataset) -> None:
    from .plotting import plot_sweeps

    save_schema(SCENARIO_SCHEMA, out / "data" / "schema.json")
    for name, ds in (("train", train), ("cal", cal), ("eval", ev)):
        save_dataset(ds, out / "data" / f"{name}.csv")
    for a, m in result.models.items():
        save_model(m, out / "models" / f"{a}.json")
    for (name, rep), a in zip(result.reports, result.models):
        atomic_write_text(out / "reports" / f"{a}.csv", reports_to_csv([(name, rep)]))
    atomic_write_text(out / "table.txt", render_report(result.reports))
    atomic_write_text(out / "table.csv", reports_to_csv(result.reports))
    atomic_write_text(out / "table_bins100.txt", render_report(result.binned_reports))
    atomic_write_text(out / "table_bins100.csv", reports_to_csv(result.binned_reports))
    for a, sw in result.sweeps.items():
        atomic_write_text(out / "sweeps" / f"{a}_{sw.feature}.csv", sw.to_csv())
    atomic_write_text(out / "softness.csv", softness_csv(result))
    lines = [f"{a}: {mid}" for a, mid in result.selections.items()]
    lines.append(f"best: {result.best}")
    atomic_write_text(out / "selection.txt", "\n".join(lines) + "\n")
    curves = {DISPLAY_NAMES[a]: sw for a, sw in result.sweeps.items()}
    plot_sweeps(curves, out / f"sweep_{SWEEP_FEATURE}.png", title="uncertainty along distance, fixed base scenario")
    plot_sweeps(curves, out / f"sweep_{SWEEP_FEATURE}.svg")
