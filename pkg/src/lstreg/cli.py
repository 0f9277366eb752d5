"""Command-line entry point: ``lstreg fit | sim | boxplot-data``.

Exit codes: 0 on success, 1 for user errors (bad files, flags or
configuration), 2 for numerical failures of an estimator or a study.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .core import METHODS, Dataset
from .errors import ConfigurationError, ContractViolation, FormatError, LstRegError
from .ingest import ColumnSpec, LoadReport, load_csv, parse_column, parse_columns
from .lst import DEFAULT_ALPHA, DEFAULT_DELTA, LstConfig
from .lts import LtsConfig
from .simharness import (MethodConfigs, SimulationScenario, fit_method, repeat_fits,
                         run_study)

log = logging.getLogger("lstreg")

USER_ERROR = 1
NUMERIC_ERROR = 2

SCENARIO_KEYS = ("n", "p", "design", "rho", "beta0", "rate", "point", "replications", "seed")
ESTIMATOR_KEYS = ("alpha", "delta", "restarts", "h", "starts", "csteps", "methods")


class UserError(Exception):
    pass


def _methods(text) -> tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        items = [str(t) for t in text]
    else:
        items = [t for t in str(text).split(",") if t.strip()]
    out = tuple(t.strip().upper() for t in items)
    for m in out:
        if m not in METHODS:
            raise UserError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    return out


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("estimators")
    g.add_argument("--methods", help="comma list from LS,LST,LTS (default: all)")
    g.add_argument("--alpha", type=float, help=f"LST outlyingness cutoff (default {DEFAULT_ALPHA})")
    g.add_argument("--delta", type=float, help=f"LST candidate perturbation (default {DEFAULT_DELTA})")
    g.add_argument("--restarts", type=int, help="LST restarts (default 1)")
    g.add_argument("--h", type=int, help="LTS coverage (default floor((n+p+1)/2))")
    g.add_argument("--starts", type=int, help="LTS random starts (default 500)")
    g.add_argument("--csteps", type=int, help="LTS concentration steps (default 10)")
    g.add_argument("--seed", type=int, help="seed for all randomness (default 0)")
    g.add_argument("--out-dir", type=Path, help="directory for CSV/JSON/figure artifacts")
    g.add_argument("--plot", action="store_true", help="also render PNG figures into --out-dir")
    g.add_argument("--threads", type=int, help="worker processes (default: CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lstreg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a delimited data file")
    fit.add_argument("data", type=Path)
    fit.add_argument("--response", default="1", help="response column, 1-based or name (default 1)")
    fit.add_argument("--predictors", help="e.g. 2-8 or 2,4,5 or names (default: all others)")
    fit.add_argument("--header", action="store_true", help="first line holds column names")
    fit.add_argument("--delimiter", choices=["comma", "tab", "whitespace"])
    fit.add_argument("--drop-incomplete", action="store_true",
                     help="skip rows with missing cells instead of failing")
    fit.add_argument("--reps", type=int, default=0,
                     help="also refit this many times and report EMSE/TT/RE around the mean fit")
    _add_estimator_flags(fit)

    for name, helptext in (("sim", "run a simulation scenario"),
                           ("boxplot-data", "per-replication squared deviations, long format")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("config", type=Path, help="scenario document (.json, .yaml)")
        sp.add_argument("--reps", type=int, help="replications (overrides the config)")
        _add_estimator_flags(sp)
    return parser


def load_config(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise UserError(f"cannot read {path}: {exc.strerror}") from None
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            import yaml
            doc = yaml.safe_load(text)
        else:
            doc = json.loads(text)
    except Exception as exc:
        raise UserError(f"{path}: not a valid scenario document: {exc}") from None
    if not isinstance(doc, dict):
        raise UserError(f"{path}: expected a key-value document")
    unknown = set(doc) - set(SCENARIO_KEYS) - set(ESTIMATOR_KEYS)
    if unknown:
        raise UserError(f"{path}: unknown keys {sorted(unknown)}")
    return doc


def resolve(args, doc: Optional[dict] = None) -> dict:
    """Merge config document values with flags (flags win) and fill defaults."""
    doc = dict(doc or {})
    for key in ("alpha", "delta", "restarts", "h", "starts", "csteps", "seed", "methods"):
        v = getattr(args, key, None)
        if v is not None:
            doc[key] = v
    if getattr(args, "reps", None) and "n" in doc:
        doc["replications"] = args.reps
    doc["methods"] = list(_methods(doc.get("methods", ",".join(METHODS))))
    doc.setdefault("alpha", DEFAULT_ALPHA)
    doc.setdefault("delta", DEFAULT_DELTA)
    doc.setdefault("restarts", 1)
    doc.setdefault("h", None)
    doc.setdefault("starts", 500)
    doc.setdefault("csteps", 10)
    doc.setdefault("seed", 0)
    return doc


def method_configs(cfg: dict) -> MethodConfigs:
    return MethodConfigs(
        lst=LstConfig(alpha=cfg["alpha"], delta=cfg["delta"], restarts=cfg["restarts"],
                      seed=cfg["seed"]),
        lts=LtsConfig(h=cfg["h"], starts=cfg["starts"], csteps=cfg["csteps"], seed=cfg["seed"]))


def scenario_from(cfg: dict) -> SimulationScenario:
    missing = [k for k in ("n", "p") if k not in cfg]
    if missing:
        raise UserError(f"scenario is missing {missing}")
    kw = {k: cfg[k] for k in SCENARIO_KEYS if k in cfg and cfg[k] is not None}
    for k in ("beta0", "point"):
        if k in kw:
            kw[k] = tuple(kw[k])
    return SimulationScenario(**kw)


def _workers(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _prepare_out(args) -> Optional[Path]:
    if args.out_dir is None:
        if args.plot:
            raise UserError("--plot needs --out-dir")
        return None
    args.out_dir.mkdir(parents=True, exist_ok=True)
    return args.out_dir


def cmd_fit(args, argv) -> int:
    predictors = parse_columns(args.predictors) if args.predictors else None
    spec = ColumnSpec(response=parse_column(args.response), predictors=predictors,
                      skip_header=args.header)
    cfg = resolve(args)
    out = _prepare_out(args)
    info = LoadReport()
    try:
        d = load_csv(args.data, spec, delimiter=args.delimiter,
                     drop_incomplete=args.drop_incomplete, report=info)
    except OSError as exc:
        raise UserError(f"cannot read {args.data}: {exc.strerror}") from None
    if info.dropped:
        print(f"dropped {info.dropped} incomplete rows", file=sys.stderr)
    configs = method_configs(cfg)

    fits = {}
    failed = []
    for m in cfg["methods"]:
        try:
            fits[m] = fit_method(m, d, configs, np.random.default_rng(cfg["seed"]))
        except LstRegError as exc:
            print(f"error: {m}: {type(exc).__name__}: {exc}", file=sys.stderr)
            failed.append(m)

    print(f"data: {args.data}  n={d.n}  p={d.p}")
    for m, f in fits.items():
        coef = " ".join(f"{b: .6g}" for b in f.beta)
        print(f"{m:>4}  objective={f.objective:.6g}  retained={f.retained.size}/{d.n}  beta=[{coef}]")

    artifacts = []
    table = None
    if args.reps and not failed:
        res = repeat_fits(d, cfg["methods"], args.reps, cfg["seed"], configs, _workers(args))
        table = res.table
        print(table.to_text())

    if out is not None:
        for m, f in fits.items():
            path = out / f"fit_{m}.csv"
            _write_fit_csv(d, f, path)
            artifacts.append(str(path))
        if table is not None:
            (out / "metrics.csv").write_text(table.to_csv(include_time=False))
            artifacts.append(str(out / "metrics.csv"))
        if args.plot and fits:
            from . import plotting
            artifacts.append(str(plotting.fitted_residual_figure(d, fits, out / "fit_residuals.png")))
            if d.p == 2:
                artifacts.append(str(plotting.simple_regression_figure(d, fits, out / "fit_lines.png")))
        report = {
            "command": ["lstreg"] + list(argv),
            "config": {**cfg, "data": str(args.data), "response": args.response,
                       "predictors": args.predictors, "header": args.header,
                       "delimiter": info.delimiter, "drop_incomplete": args.drop_incomplete,
                       "dropped_rows": info.dropped, "reps": args.reps},
            "seed": cfg["seed"],
            "fits": {m: f.summary() for m, f in fits.items()},
            "failed": failed,
            "metrics": [asdict(r) for r in table] if table is not None else None,
            "artifacts": artifacts + [str(out / "report.json")],
        }
        _write_json(out / "report.json", report)
    return NUMERIC_ERROR if failed else 0


def _write_fit_csv(d: Dataset, fit, path: Path) -> None:
    r = d.y - d.design @ fit.beta
    kept = np.zeros(d.n, dtype=bool)
    kept[fit.retained] = True
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "fitted", "residual", "retained"])
        for i in range(d.n):
            w.writerow([i, repr(float(d.y[i] - r[i])), repr(float(r[i])), int(kept[i])])


def _study(args):
    doc = load_config(args.config)
    cfg = resolve(args, doc)
    scenario = scenario_from(cfg)
    cfg.update(scenario.to_dict())
    configs = method_configs(cfg)
    out = _prepare_out(args)
    result = run_study(scenario, cfg["methods"], configs, _workers(args))
    return cfg, scenario, result, out


def _study_report(args, argv, cfg, result, artifacts, out):
    report = {
        "command": ["lstreg"] + list(argv),
        "config": cfg,
        "seed": cfg["seed"],
        "metrics": [asdict(r) for r in result.table],
        "errors": [list(e) for e in result.errors],
        "artifacts": artifacts + [str(out / "report.json")],
    }
    _write_json(out / "report.json", report)


def cmd_sim(args, argv) -> int:
    cfg, scenario, result, out = _study(args)
    print(f"n={scenario.n} p={scenario.p} design={scenario.design} rate={scenario.rate} "
          f"R={scenario.replications} seed={scenario.seed}")
    print(result.table.to_text())
    if out is not None:
        artifacts = []
        (out / "metrics.csv").write_text(result.table.to_csv(include_time=False))
        artifacts.append(str(out / "metrics.csv"))
        with open(out / "timing.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "TT"])
            for r in result.table:
                w.writerow([r.method, f"{r.total_time_seconds:.4f}"])
        artifacts.append(str(out / "timing.csv"))
        if args.plot:
            from . import plotting
            artifacts.append(str(plotting.boxplot_figure(
                result.squared_deviations(), out / "squared_deviation_boxplot.png",
                title=f"n={scenario.n}, p={scenario.p}, rate={scenario.rate}")))
        _study_report(args, argv, cfg, result, artifacts, out)
    return 0


def boxplot_rows(result) -> list[tuple[int, str, float]]:
    rows = []
    sq = result.squared_deviations()
    for m, v in sq.items():
        for rep, val in enumerate(v):
            rows.append((rep, m, float(val)))
    return rows


def cmd_boxplot_data(args, argv) -> int:
    cfg, scenario, result, out = _study(args)
    rows = boxplot_rows(result)
    if out is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["replication", "method", "squared_deviation"])
        for rep, m, v in rows:
            w.writerow([rep, m, repr(v)])
        return 0
    path = out / "boxplot_data.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replication", "method", "squared_deviation"])
        for rep, m, v in rows:
            w.writerow([rep, m, repr(v)])
    artifacts = [str(path)]
    if args.plot:
        from . import plotting
        artifacts.append(str(plotting.boxplot_figure(
            result.squared_deviations(), out / "squared_deviation_boxplot.png",
            title=f"n={scenario.n}, p={scenario.p}, rate={scenario.rate}")))
    print(result.table.to_text())
    print(f"wrote {len(rows)} rows to {path}")
    _study_report(args, argv, cfg, result, artifacts, out)
    return 0


COMMANDS = {"fit": cmd_fit, "sim": cmd_sim, "boxplot-data": cmd_boxplot_data}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, argv)
    except (UserError, ConfigurationError, FormatError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USER_ERROR
    except LstRegError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return NUMERIC_ERROR


if __name__ == "__main__":
    sys.exit(main())
