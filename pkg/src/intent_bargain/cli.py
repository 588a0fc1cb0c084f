"""Command-line front end.

    intent-bargain scenario  --config cfg.json --seed 42 --out runs/
    intent-bargain solve     --curves runs/utilities.csv --methods nbs,ksbs --out runs/
    intent-bargain arbitrate --intents intents.json --config cfg.json --out runs/
    intent-bargain plot-data --curves runs/utilities.csv --report runs/report.json --out runs/
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import bargain, pipeline, ran
from .bargain import ArbitrationReport, BargainingProblem
from .curves import CurveFormatError, eval_curve, read_curves_csv, write_curves_csv

log = logging.getLogger("intent_bargain")

RAW_CSV = "raw_curves.csv"
UTILITY_CSV = "utilities.csv"
REPORT_JSON = "report.json"
ARBITRATION_JSON = "arbitration.json"
DENSE_CSV = "plot_dense.csv"
MARKERS_CSV = "plot_markers.csv"


class CliError(Exception):
    pass


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_config(path: str | None) -> dict:
    if path is None:
        return ran.default_config()
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read scenario config {path}: {exc}") from None


def _scenario_curves(cfg: dict, seed: int | None):
    scenario, env, grid, thresholds = ran.scenario_from_config(cfg, seed)
    kpi = ran.build_kpi_curves(scenario, grid, env, thresholds)
    curves = {
        "CQI": ran.normalize_to_utility(kpi.mean_cqi, grid),
        "SINR": ran.normalize_to_utility(kpi.mean_sinr, grid),
    }
    return kpi, curves


def _raw_csv(kpi: ran.KpiCurves) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tilt_deg", "mean_sinr_db", "mean_cqi"])
    for t, s, c in zip(kpi.tilt_grid, kpi.mean_sinr, kpi.mean_cqi):
        w.writerow([f"{t:.6f}", f"{s:.6f}", f"{c:.6f}"])
    return buf.getvalue()


def _parse_weights(text: str | None, n: int):
    if text is None:
        return None
    try:
        w = [float(x) for x in text.split(",")]
    except ValueError:
        raise CliError(f"bad --weights {text!r}") from None
    if len(w) != n:
        raise CliError(f"--weights has {len(w)} entries for {n} players")
    return pipeline.normalized_weights(w)


def _summary(report: ArbitrationReport) -> str:
    lines = [f"{'method':<6} {'tilt':>6} {'JFI':>7}"]
    for s in report.solutions:
        lines.append(f"{s.method:<6} {s.parameter:>5.1f}° {s.jfi:>7.4f}")
    lines.append(f"chosen: {report.chosen_method} at {report.chosen_parameter:.1f}°")
    return "\n".join(lines)


def run_scenario(args) -> list[Path]:
    cfg = _load_config(args.config)
    kpi, curves = _scenario_curves(cfg, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / RAW_CSV).write_text(_raw_csv(kpi))
    write_curves_csv(out / UTILITY_CSV, kpi.tilt_grid, curves)
    return [out / RAW_CSV, out / UTILITY_CSV]


def run_solve(args) -> list[Path]:
    if not args.curves:
        raise CliError("solve needs --curves")
    curves = read_curves_csv(args.curves)
    if len(curves) < 2:
        raise CliError("need at least two utility columns to bargain")
    problem = BargainingProblem.from_curves(
        curves, weights=_parse_weights(args.weights, len(curves)),
        search_resolution=args.resolution, sebs_total_gain=args.sebs_total_gain)
    report = bargain.arbitrate(problem, args.methods)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(report.to_dict(), out / REPORT_JSON)
    print(_summary(report))
    return [out / REPORT_JSON]


def run_arbitrate(args) -> list[Path]:
    if not args.intents:
        raise CliError("arbitrate needs --intents")
    try:
        intents = pipeline.load_intents(args.intents)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read intents {args.intents}: {exc}") from None
    raw_by_kpi = None
    if args.curves:
        curves_by_kpi = read_curves_csv(args.curves)
    else:
        kpi, curves_by_kpi = _scenario_curves(_load_config(args.config), args.seed)
        raw_by_kpi = {"CQI": (kpi.tilt_grid, kpi.mean_cqi), "SINR": (kpi.tilt_grid, kpi.mean_sinr)}
    result = pipeline.run_pipeline(intents, curves_by_kpi, raw_by_kpi, args.methods,
                                   args.resolution)
    if result.report is None:
        raise CliError("no conflict: intents do not contend for the same parameter; "
                       f"apply targets directly {result.targets}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(result.to_dict(), out / ARBITRATION_JSON)
    print(_summary(result.report))
    return [out / ARBITRATION_JSON]


def _load_report(path: Path) -> ArbitrationReport:
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read report {path}: {exc}") from None
    if "report" in data:
        data = data["report"]
    if not data or "solutions" not in data:
        raise CliError(f"{path} holds no solved report")
    return ArbitrationReport.from_dict(data)


def emit_plot_data(curves: dict, report: ArbitrationReport, resolution: float):
    """Dense interpolated utilities plus one marker row per solved method."""
    ids = list(report.player_ids) or list(curves)
    missing = [i for i in ids if i not in curves]
    if missing:
        raise CliError(f"curves file lacks players {missing}")
    sub = {i: curves[i] for i in ids}
    grid = BargainingProblem.from_curves(sub, search_resolution=resolution).grid()
    dense = write_curves_csv(None, grid, sub)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "parameter"] + [f"utility_{i}" for i in ids])
    for s in report.solutions:
        w.writerow([s.method, repr(s.parameter)]
                   + [repr(float(eval_curve(sub[i], s.parameter))) for i in ids])
    return dense, buf.getvalue()


def run_plot_data(args) -> list[Path]:
    if not args.curves:
        raise CliError("plot-data needs --curves")
    out = Path(args.out)
    report_path = Path(args.report) if args.report else out / REPORT_JSON
    if not report_path.exists():
        raise CliError(f"missing report {report_path}; run solve or arbitrate first")
    report = _load_report(report_path)
    dense, markers = emit_plot_data(read_curves_csv(args.curves), report, args.resolution)
    out.mkdir(parents=True, exist_ok=True)
    (out / DENSE_CSV).write_text(dense)
    (out / MARKERS_CSV).write_text(markers)
    return [out / DENSE_CSV, out / MARKERS_CSV]


COMMANDS = {
    "scenario": run_scenario,
    "solve": run_solve,
    "arbitrate": run_arbitrate,
    "plot-data": run_plot_data,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="intent-bargain", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=sorted(COMMANDS))
    p.add_argument("--config", help="scenario config JSON (default: built-in scenario)")
    p.add_argument("--curves", help="utility curve CSV")
    p.add_argument("--intents", help="intents JSON")
    p.add_argument("--report", help="solved report JSON (plot-data)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--methods", default="nbs,wnbs,ksbs,sebs")
    p.add_argument("--weights", help="comma-separated player weights, e.g. 0.8,0.2")
    p.add_argument("--resolution", type=float, default=bargain.DEFAULT_RESOLUTION)
    p.add_argument("--seed", type=int, default=None, help="shadowing seed (overrides config)")
    p.add_argument("--sebs-total-gain", type=float, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.methods = bargain.parse_methods(args.methods)
        written = COMMANDS[args.subcommand](args)
    except pipeline.StageError as exc:
        print(f"error [{exc.stage}]: {exc.cause}", file=sys.stderr)
        return 2
    except (CliError, CurveFormatError, ran.ScenarioError, bargain.BargainingError,
            pipeline.PipelineError, OSError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
