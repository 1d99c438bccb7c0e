"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error. Every
failure prints one ``error: <Kind>: <message>`` line to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .calibration import CalibrationConfig, calibrate_model
from .core import atomic_write_text, encode_point, load_dataset, load_schema, one_hot_encode, save_dataset, save_schema
from .errors import BadArguments, DataError, UsageError
from .evaluation import decompose, reports_from_csv, reports_to_csv, select_best, sweep
from .persist import FORMAT_VERSION, load_model, save_model
from .synth import SCENARIO_SCHEMA, GeneratorConfig, generate
from .trees import APPROACHES, DISPLAY_NAMES, TreeHyperparams

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
EXPLAIN_MIN_WEIGHT = 1e-6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pairs(text: str) -> dict[str, str]:
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise BadArguments(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


_HYPER_TYPES = {
    "max_depth": int,
    "min_leaf_weight": float,
    "min_gain": float,
    "n_trees": int,
    "feature_subset": int,
    "bootstrap": lambda v: {"1": True, "true": True, "0": False, "false": False}[v.lower()],
    "n_bins": int,
    "learning_rate": float,
    "max_iters": int,
    "tol": float,
    "init_steepness": float,
}


def _hyperparams(items: list[str]) -> TreeHyperparams:
    values = {}
    for item in items:
        for k, v in _pairs(item).items():
            if k not in _HYPER_TYPES:
                raise BadArguments(f"unknown hyperparameter {k!r}")
            try:
                values[k] = _HYPER_TYPES[k](v)
            except (ValueError, KeyError):
                raise BadArguments(f"bad value for {k}: {v!r}") from None
    return TreeHyperparams(**values)


def _binning(text: str):
    if text in ("unique", "auto"):
        return text
    try:
        k = int(text)
    except ValueError:
        raise BadArguments(f"--bins expects an integer, 'unique' or 'auto', got {text!r}") from None
    if k < 1:
        raise BadArguments("--bins must be >= 1")
    return k


def cmd_gen_data(args) -> None:
    ds = generate(GeneratorConfig(args.mode, args.n, args.seed))
    save_dataset(ds, args.out, emit_truth=args.emit_truth)
    save_schema(SCENARIO_SCHEMA, args.schema_out)


def cmd_train(args) -> None:
    from .study import train_model

    if args.approach not in APPROACHES:
        raise BadArguments(f"unknown approach {args.approach!r}")
    hp = _hyperparams(args.hyper)
    ds = one_hot_encode(load_dataset(args.data, load_schema(args.schema)))
    save_model(train_model(args.approach, ds, hp, args.seed), args.out)


def cmd_calibrate(args) -> None:
    cfg = CalibrationConfig(args.cl, args.fallback_u)
    m = load_model(args.model)
    cal = load_dataset(args.data, m.schema)
    save_model(calibrate_model(m, cal, cfg), args.out)


def cmd_predict(args) -> None:
    m = load_model(args.model)
    est = m.explain(encode_point(m.schema, _pairs(args.point)))
    print(f"uncertainty {est.value!r}" + (" (calibrated)" if est.calibrated else ""))
    if not args.explain:
        return
    shown = [t for t in est.trace if t.path_weight > EXPLAIN_MIN_WEIGHT]
    hidden = [t for t in est.trace if t.path_weight <= EXPLAIN_MIN_WEIGHT]
    for t in sorted(shown, key=lambda t: -t.path_weight):
        print(f"{t.leaf_id}\tweight={t.path_weight:.10f}\tu={t.leaf_uncertainty:.6f}\t{t.conditions}")
    if hidden:
        rest = sum(t.path_weight for t in hidden)
        print(f"({len(hidden)} more leaves)\tweight={rest:.10f}")


def cmd_evaluate(args) -> None:
    m = load_model(args.model)
    ds = load_dataset(args.data, m.schema)
    enc = one_hot_encode(ds)
    rep = decompose(m.predict(enc.X), enc.y, _binning(args.bins))
    mid = args.id or DISPLAY_NAMES[m.approach]
    atomic_write_text(args.out_report, reports_to_csv([(mid, rep)]))


def cmd_sweep(args) -> None:
    m = load_model(args.model)
    sw = sweep(m, _pairs(args.base), args.feature, args.lo, args.hi, args.steps)
    atomic_write_text(args.out, sw.to_csv())
    if args.svg:
        from .plotting import plot_sweeps

        plot_sweeps({DISPLAY_NAMES[m.approach]: sw}, Path(args.out).with_suffix(".svg"))
    print(f"max_jump {sw.max_jump!r}\tjump_count {sw.jump_count()}")


def cmd_select(args) -> None:
    reports = []
    for path in args.reports.split(","):
        if path.strip():
            reports.extend(reports_from_csv(Path(path.strip()).read_text(encoding="utf-8")))
    print(select_best(reports, args.eps))


def cmd_study(args) -> None:
    from .evaluation import render_report
    from .study import run_study

    result = run_study(
        args.train_n, args.cal_n, args.eval_n, args.seed, args.out_dir, grid=args.grid, binning=_binning(args.bins)
    )
    sys.stdout.write(render_report(result.reports))
    print(f"best: {result.best}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="softwrap", description="Tree-family uncertainty estimates with calibrated upper bounds.")
    p.add_argument("--version", action="version", version=f"model format {FORMAT_VERSION}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-data", help="generate synthetic scenario data")
    g.add_argument("--mode", choices=("uniform", "representative"), required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--schema-out", required=True)
    g.add_argument("--emit-truth", action="store_true", help="append the true_p column")
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train a quality impact model")
    t.add_argument("--approach", choices=APPROACHES, required=True)
    t.add_argument("--data", required=True)
    t.add_argument("--schema", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--hyper", action="append", default=[], metavar="K=V")
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_train)

    c = sub.add_parser("calibrate", help="calibrate leaf uncertainties to upper bounds")
    c.add_argument("--model", required=True)
    c.add_argument("--data", required=True)
    c.add_argument("--cl", type=float, default=0.9999)
    c.add_argument("--fallback-u", type=float, default=1.0)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_calibrate)

    r = sub.add_parser("predict", help="estimate uncertainty for one point")
    r.add_argument("--model", required=True)
    r.add_argument("--point", required=True, metavar="K=V,...")
    r.add_argument("--explain", action="store_true")
    r.set_defaults(func=cmd_predict)

    e = sub.add_parser("evaluate", help="Brier score and decomposition on labeled data")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--out-report", required=True)
    e.add_argument("--bins", default="auto", help="integer, 'unique' or 'auto'")
    e.add_argument("--id", default=None, help="model id written to the report")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", help="vary one continuous feature of a base point")
    s.add_argument("--model", required=True)
    s.add_argument("--base", required=True, metavar="K=V,...")
    s.add_argument("--feature", required=True)
    s.add_argument("--lo", type=float, required=True)
    s.add_argument("--hi", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--svg", action="store_true", help="also write a line chart next to --out")
    s.set_defaults(func=cmd_sweep)

    sel = sub.add_parser("select", help="pick the best model from report files")
    sel.add_argument("--reports", required=True, metavar="F1,F2,...")
    sel.add_argument("--eps", type=float, default=1e-3)
    sel.set_defaults(func=cmd_select)

    st = sub.add_parser("study", help="run all six approaches end to end")
    st.add_argument("--train-n", type=int, default=50_000)
    st.add_argument("--cal-n", type=int, default=20_000)
    st.add_argument("--eval-n", type=int, default=20_000)
    st.add_argument("--seed", type=int, default=1)
    st.add_argument("--out-dir", required=True)
    st.add_argument("--grid", action="store_true", help="search depth x trees and keep the best per approach")
    st.add_argument("--bins", default="unique", help="binning for the comparison table")
    st.set_defaults(func=cmd_study)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: UsageError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"error: internal: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
