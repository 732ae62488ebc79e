"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 parse or validation error,
3 evaluation error (for example an empty ground truth).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import harness
from .errors import InputError, OcrqaError, UndefinedScoreError
from .metrics import METRICS, MetricConfig, evaluate
from .testmodel import (
    Dimension,
    TestCase,
    build_decision_table,
    case_to_dict,
    check_coverage,
    complexity,
    derive_ofat,
    export_table_csv,
    load_model,
    parse_case,
)
from .textmodel import normalize, parse_ground_truth

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_EVAL = 0, 1, 2, 3
THRESHOLD_ENV = "OCRQA_THRESHOLD"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _metric_list(value: str) -> tuple[str, ...]:
    names = tuple(v.strip() for v in value.split(",") if v.strip())
    unknown = [n for n in names if n not in METRICS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown metric {unknown[0] if unknown else value!r}; choose from {','.join(METRICS)}")
    return names


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ocrqa", description="OCR accuracy metrics and model-based test suites.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="score one OCR output against its ground truth")
    ev.add_argument("--gt", required=True, type=Path)
    ev.add_argument("--ocr", required=True, type=Path)
    ev.add_argument("--metrics", type=_metric_list, default=METRICS)
    ev.add_argument("--threshold", type=float)
    ev.add_argument("--format", choices=("text", "json"), default="text")

    suite = sub.add_parser("suite", help="run a test suite").add_subparsers(dest="action", required=True,
                                                                          parser_class=_Parser)
    run = suite.add_parser("run", help="evaluate every case and system in a manifest")
    run.add_argument("manifest", type=Path)
    run.add_argument("--report", type=Path, help="directory to write report files to (default: stdout)")
    run.add_argument("--format", choices=harness.FORMATS, default="json")
    run.add_argument("--threshold", type=float)
    run.add_argument("--jobs", type=int, default=1)

    model = sub.add_parser("model", help="inspect a test model").add_subparsers(dest="action", required=True,
                                                                               parser_class=_Parser)
    cx = model.add_parser("complexity", help="print CC, IC, OC and their product")
    cx.add_argument("model", type=Path)
    cx.add_argument("--format", choices=("text", "json"), default="text")
    cov = model.add_parser("coverage", help="stub coverage of a manifest's cases")
    cov.add_argument("model", type=Path)
    cov.add_argument("manifest", type=Path)
    cov.add_argument("--format", choices=("text", "json"), default="text")
    ofat = model.add_parser("ofat", help="derive a one-factor-at-a-time manifest skeleton")
    ofat.add_argument("model", type=Path)
    ofat.add_argument("--base", required=True, type=Path)
    ofat.add_argument("--systems", default="system", help="comma-separated system names")
    ofat.add_argument("--format", choices=("yaml", "json"), default="yaml")

    table = sub.add_parser("table", help="decision tables").add_subparsers(dest="action", required=True,
                                                                           parser_class=_Parser)
    exp = table.add_parser("export", help="write the decision table of a manifest as CSV")
    exp.add_argument("model", type=Path)
    exp.add_argument("manifest", type=Path)
    exp.add_argument("--csv", required=True, help="output file, or - for stdout")
    exp.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _config(threshold: float | None) -> MetricConfig:
    if threshold is None and os.environ.get(THRESHOLD_ENV):
        try:
            threshold = float(os.environ[THRESHOLD_ENV])
        except ValueError:
            raise UsageError(f"{THRESHOLD_ENV} is not a number: {os.environ[THRESHOLD_ENV]!r}") from None
    try:
        return MetricConfig() if threshold is None else MetricConfig(pass_threshold=threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {str(path)!r}: {exc.strerror}") from None


def _fmt(value) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _cmd_eval(args, out) -> int:
    config = _config(args.threshold)
    report = evaluate(parse_ground_truth(_read(args.gt)), normalize(_read(args.ocr)), config, args.metrics)
    doc = {m: getattr(report, m) for m in ("fca", "ssa", "ossa", "tla") if m in args.metrics}
    if "class" in args.metrics:
        doc["per_class"] = {c.value: v for c, v in report.per_class.items()}
    if "section" in args.metrics:
        doc["per_section"] = {
            k.value: ({m: v for m, v in r.scores().items() if v is not None} if r else None)
            for k, r in report.per_section.items()
        }
    doc["result"] = report.output_class
    doc["threshold"] = config.pass_threshold
    if args.format == "json":
        out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
        return EXIT_OK
    for m in ("fca", "ssa", "ossa", "tla"):
        if m in doc:
            out.write(f"{m.upper():<5} {_fmt(doc[m])}\n")
    for cls, value in doc.get("per_class", {}).items():
        out.write(f"class {cls:<9} {_fmt(value)}\n")
    for kind, scores in doc.get("per_section", {}).items():
        cells = " ".join(f"{m}={_fmt(v)}" for m, v in scores.items()) if scores else "n/a"
        out.write(f"section {kind:<12} {cells}\n")
    if doc["result"]:
        out.write(f"result {doc['result']} (threshold {config.pass_threshold})\n")
    return EXIT_OK


def _cmd_suite_run(args, out, err) -> int:
    config = _config(args.threshold)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    suite = harness.load_manifest(args.manifest)
    for warning in suite.warnings:
        err.write(f"warning: {warning}\n")
    report = harness.run_suite(suite, config, max_workers=args.jobs)
    files = harness.render_report(harness.aggregate(report, suite.model, suite.cases), args.format)
    if args.report is not None:
        args.report.mkdir(parents=True, exist_ok=True)
        for name, data in files.items():
            (args.report / name).write_bytes(data)
        err.write(f"wrote {', '.join(sorted(files))} to {args.report}\n")
    else:
        for name, data in files.items():
            if len(files) > 1:
                out.write(f"# {name}\n")
            out.write(data.decode("utf-8"))
    return EXIT_OK


def _cmd_complexity(args, out) -> int:
    report = complexity(load_model(args.model))
    if args.format == "json":
        doc = {"cc": report.cc, "ic": report.ic, "oc": report.oc, "total": report.total}
        out.write(json.dumps(doc, sort_keys=True) + "\n")
    else:
        out.write(f"{report}\n")
    return EXIT_OK


def _cmd_coverage(args, out) -> int:
    model = load_model(args.model)
    suite = harness.load_manifest(args.manifest, model)
    report = check_coverage(model, suite.cases)
    if args.format == "json":
        doc = {
            "covered": sorted(report.covered),
            "uncovered": sorted(report.uncovered),
            "ratio": {d.value: r for d, r in report.by_dimension.items()} | {"overall": report.overall},
        }
        out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
        return EXIT_OK
    for dim in Dimension:
        out.write(f"{dim.value:<8} {report.by_dimension[dim]:.1%}\n")
    out.write(f"overall  {report.overall:.1%}\n")
    for stub_id in model.stub_ids():
        if stub_id in report.uncovered:
            out.write(f"uncovered {stub_id}\n")
    return EXIT_OK


def _cmd_ofat(args, out) -> int:
    systems = [s.strip() for s in args.systems.split(",") if s.strip()]
    if not systems:
        raise UsageError("--systems needs at least one name")
    model = load_model(args.model)
    base = parse_case(_read(args.base))
    cases = [
        TestCase(c.id, c.selections, c.expected_output, f"gt/{c.id}.txt",
                 {s: f"ocr/{s}/{c.id}.txt" for s in systems})
        for c in derive_ofat(model, base)
    ]
    model_ref = os.path.relpath(args.model)
    if args.format == "json":
        doc = {"model": model_ref, "systems": systems,
               "cases": [case_to_dict(c) for c in cases]}
        out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        out.write(harness.dump_manifest(model_ref, systems, cases))
    return EXIT_OK


def _cmd_table_export(args, out, err) -> int:
    model = load_model(args.model)
    suite = harness.load_manifest(args.manifest, model)
    table = build_decision_table(model, suite.cases)
    data = export_table_csv(table)
    if args.csv == "-":
        out.write(data.decode("utf-8"))
    else:
        Path(args.csv).write_bytes(data)
    if args.format == "json":
        summary = {"rows": len(table.rows), "columns": len(table.columns), "csv": args.csv}
        (err if args.csv == "-" else out).write(json.dumps(summary, sort_keys=True) + "\n")
    elif args.csv != "-":
        out.write(f"wrote {len(table.rows)} x {len(table.columns)} table to {args.csv}\n")
    return EXIT_OK


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "eval":
            return _cmd_eval(args, out)
        if args.command == "suite":
            return _cmd_suite_run(args, out, err)
        if args.command == "model":
            handler = {"complexity": _cmd_complexity, "coverage": _cmd_coverage, "ofat": _cmd_ofat}[args.action]
            return handler(args, out)
        return _cmd_table_export(args, out, err)
    except UsageError as exc:
        err.write(f"{exc}\n")
        err.write(parser.format_usage())
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UndefinedScoreError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_EVAL
    except OcrqaError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
