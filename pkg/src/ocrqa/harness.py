"""Batch evaluation of test suites.

A manifest binds test cases to a ground-truth file and one OCR output file
per system under test. :func:`run_suite` scores every (case, system) pair,
:func:`aggregate` folds the results into report tables and
:func:`render_report` writes them as JSON, CSV or Markdown.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

import yaml

from .errors import InputError, OcrqaError, ParseError, UndefinedScoreError, ValidationError
from .metrics import DEFAULT_CONFIG, PASS, MetricConfig, MetricReport, evaluate
from .testmodel import (
    TestCase,
    TestModel3D,
    case_from_dict,
    case_to_dict,
    is_complex,
    load_model,
    validate_case,
)
from .textmodel import CharClass, SectionKind, normalize, parse_ground_truth

SCORES = ("fca", "ssa", "ossa", "tla")
SECTIONS = (SectionKind.STORE, SectionKind.ITEMS, SectionKind.TRANSACTION, SectionKind.MISC, SectionKind.OTHER)
FORMATS = ("json", "csv", "markdown")


@dataclass(frozen=True)
class Suite:
    """A validated manifest.

    Attributes:
        model_ref: model path exactly as written in the manifest.
        base_dir: directory that relative paths are resolved against.
        warnings: referenced files that were missing at load time.
    """

    model_ref: str
    model: TestModel3D
    cases: tuple[TestCase, ...]
    systems: tuple[str, ...]
    base_dir: Path = Path(".")
    warnings: tuple[str, ...] = ()

    def pending(self) -> list[tuple[TestCase, str]]:
        """Every (case, system) evaluation, sorted by case id then system."""
        return [(c, s) for c in sorted(self.cases, key=lambda c: c.id) for s in sorted(self.systems)]


def parse_manifest(data: bytes | str | Mapping, base_dir: str | Path = ".", model: TestModel3D | None = None) -> Suite:
    """Validate a manifest document.

    The model is loaded from the manifest's ``model`` path unless one is
    passed in.

    Raises:
        ParseError: on schema violations.
        ValidationError: on unknown stubs, duplicate case ids or OCR
            outputs for undeclared systems.
    """
    if not isinstance(data, Mapping):
        try:
            data = yaml.safe_load(data)
        except yaml.YAMLError as exc:
            raise ParseError(str(exc)) from None
    if not isinstance(data, Mapping):
        raise ParseError("manifest must be a mapping", "<root>")
    base_dir = Path(base_dir)
    model_ref = data.get("model")
    if not isinstance(model_ref, str) or not model_ref:
        raise ParseError("manifest needs a model path", "model")
    systems = data.get("systems")
    systems = [] if systems is None else systems
    if not isinstance(systems, list) or not all(isinstance(s, str) and s for s in systems):
        raise ParseError("systems must be a list of names", "systems")
    if len(set(systems)) != len(systems):
        raise ValidationError("duplicate system names")
    raw_cases = data.get("cases")
    raw_cases = [] if raw_cases is None else raw_cases
    if not isinstance(raw_cases, list):
        raise ParseError("cases must be a list", "cases")
    cases = [case_from_dict(c, f"cases[{k}]") for k, c in enumerate(raw_cases)]

    if model is None:
        model = load_model(base_dir / model_ref)

    seen: set[str] = set()
    warnings = []
    for case in cases:
        if case.id in seen:
            raise ValidationError(f"duplicate case id {case.id!r}")
        seen.add(case.id)
        validate_case(model, case)
        extra = set(case.ocr_refs) - set(systems)
        if extra:
            raise ValidationError(f"case {case.id!r}: OCR output for undeclared system {sorted(extra)[0]!r}")
        refs = [case.gt_ref, *(case.ocr_refs[s] for s in sorted(case.ocr_refs))]
        for ref in refs:
            if not ref or not (base_dir / ref).is_file():
                warnings.append(f"case {case.id!r}: missing file {ref!r}")
    return Suite(model_ref, model, tuple(cases), tuple(systems), base_dir, tuple(warnings))


def load_manifest(path: str | Path, model: TestModel3D | None = None) -> Suite:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read manifest {str(path)!r}: {exc.strerror}") from None
    return parse_manifest(data, path.parent, model)


def dump_manifest(model_ref: str, systems: Iterable[str], cases: Iterable[TestCase]) -> str:
    doc = {"model": model_ref, "systems": list(systems), "cases": [case_to_dict(c) for c in cases]}
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


@dataclass(frozen=True)
class CaseResult:
    case_id: str
    system: str
    complex_context: bool
    report: MetricReport | None = None
    skipped_reason: str | None = None

    @property
    def result(self) -> str | None:
        return None if self.report is None else self.report.output_class


@dataclass(frozen=True)
class SystemSummary:
    evaluated: int
    skipped: int
    passes: int
    pass_rate: float | None
    means: Mapping[str, float | None]
    section_means: Mapping[SectionKind, Mapping[str, float | None]]
    class_means: Mapping[CharClass, float | None]
    context_fca: Mapping[str, float | None]


@dataclass(frozen=True)
class RunReport:
    model_ref: str
    threshold: float
    systems: tuple[str, ...]
    results: tuple[CaseResult, ...]
    summaries: Mapping[str, SystemSummary] = field(default_factory=dict)

    def for_system(self, system: str) -> list[CaseResult]:
        return [r for r in self.results if r.system == system]


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path.name}: {exc.strerror}") from None


def _evaluate_one(suite: Suite, case: TestCase, system: str, config: MetricConfig) -> CaseResult:
    complex_context = is_complex(suite.model, case)
    if system not in case.ocr_refs:
        return CaseResult(case.id, system, complex_context, skipped_reason="no OCR output for this system")
    try:
        gt = parse_ground_truth(_read(suite.base_dir / case.gt_ref))
        ocr = normalize(_read(suite.base_dir / case.ocr_refs[system]))
        report = evaluate(gt, ocr, config)
    except UndefinedScoreError:
        return CaseResult(case.id, system, complex_context, skipped_reason="empty ground truth")
    except OcrqaError as exc:
        return CaseResult(case.id, system, complex_context, skipped_reason=str(exc))
    return CaseResult(case.id, system, complex_context, report)


def _mean(values: Iterable[float | None]) -> float | None:
    kept = [v for v in values if v is not None]
    return math.fsum(kept) / len(kept) if kept else None


def summarize(results: list[CaseResult]) -> SystemSummary:
    done = [r for r in results if r.report is not None]
    passes = sum(r.result == PASS for r in done)
    sections = {}
    for kind in SECTIONS:
        reports = [r.report.per_section.get(kind) for r in done]
        if any(reports):
            sections[kind] = {m: _mean(getattr(x, m) for x in reports if x) for m in SCORES}
    return SystemSummary(
        evaluated=len(done),
        skipped=len(results) - len(done),
        passes=passes,
        pass_rate=passes / len(done) if done else None,
        means={m: _mean(getattr(r.report, m) for r in done) for m in SCORES},
        section_means=sections,
        class_means={c: _mean(r.report.per_class.get(c) for r in done) for c in CharClass},
        context_fca={
            "normal": _mean(r.report.fca for r in done if not r.complex_context),
            "complex": _mean(r.report.fca for r in done if r.complex_context),
        },
    )


def run_suite(suite: Suite, config: MetricConfig = DEFAULT_CONFIG, max_workers: int | None = None) -> RunReport:
    """Evaluate every (case, system) pair of the suite.

    Unreadable or undecodable files and empty ground truths mark that
    evaluation as skipped with a reason; the others are unaffected. The
    report is ordered by case id then system whatever ``max_workers`` is.
    """
    jobs = suite.pending()
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            results = list(pool.map(lambda job: _evaluate_one(suite, *job, config), jobs))
    else:
        results = [_evaluate_one(suite, case, system, config) for case, system in jobs]
    summaries = {s: summarize([r for r in results if r.system == s]) for s in sorted(suite.systems)}
    return RunReport(suite.model_ref, config.pass_threshold, tuple(sorted(suite.systems)), tuple(results), summaries)


@dataclass(frozen=True)
class Table:
    name: str
    title: str
    columns: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows]


@dataclass(frozen=True)
class ReportTables:
    meta: Mapping[str, Any]
    cases: tuple[Mapping[str, Any], ...]
    tables: tuple[Table, ...]

    def table(self, name: str) -> Table:
        return next(t for t in self.tables if t.name == name)


def _case_record(r: CaseResult) -> dict:
    rep = r.report
    record = {
        "id": r.case_id,
        "system": r.system,
        "complex_context": r.complex_context,
        "result": r.result,
        "skipped_reason": r.skipped_reason,
        "per_class": {c.value: rep.per_class.get(c) for c in CharClass} if rep else {},
        "per_section": {
            k.value: (v.scores() if v else None) for k, v in rep.per_section.items()
        } if rep else {},
    }
    for m in SCORES:
        record[m] = getattr(rep, m) if rep else None
    return record


def aggregate(report: RunReport, model: TestModel3D | None = None, cases: Iterable[TestCase] = ()) -> ReportTables:
    """Group a run into per-case rows and the per-system summary tables.

    With ``model`` and ``cases`` the complex-context flag of each result is
    recomputed from the current stub severities.
    """
    results = list(report.results)
    summaries = report.summaries
    if model is not None and cases:
        by_id = {c.id: c for c in cases}
        results = [
            CaseResult(r.case_id, r.system, is_complex(model, by_id[r.case_id]), r.report, r.skipped_reason)
            if r.case_id in by_id else r
            for r in results
        ]
        summaries = {s: summarize([r for r in results if r.system == s]) for s in report.systems}

    systems = report.systems
    case_rows = tuple(_case_record(r) for r in results)
    kinds = [k for k in SECTIONS if any(k in summaries[s].section_means for s in systems)]

    tables = [
        Table("cases", "Per-case results",
              ("case", "system", "result", *SCORES, "complex_context", "skipped_reason"),
              tuple((c["id"], c["system"], c["result"] or "skipped", *(c[m] for m in SCORES),
                     c["complex_context"], c["skipped_reason"]) for c in case_rows)),
        Table("fca_by_section", "FCA by section",
              ("system", *(k.value for k in kinds)),
              tuple((s, *(summaries[s].section_means.get(k, {}).get("fca") for k in kinds)) for s in systems)),
        Table("fca_by_class", "FCA by character class",
              ("system", *(c.value for c in CharClass)),
              tuple((s, *(summaries[s].class_means[c] for c in CharClass)) for s in systems)),
        Table("metrics_overall", "All metrics, overall",
              ("system", *SCORES, "pass_rate", "passes", "evaluated", "skipped"),
              tuple((s, *(summaries[s].means[m] for m in SCORES), summaries[s].pass_rate,
                     summaries[s].passes, summaries[s].evaluated, summaries[s].skipped) for s in systems)),
        Table("metrics_by_section", "All metrics by section",
              ("system", "section", *SCORES),
              tuple((s, k.value, *(summaries[s].section_means[k][m] for m in SCORES))
                    for s in systems for k in kinds if k in summaries[s].section_means)),
        Table("fca_by_context", "FCA, normal vs complex context",
              ("system", "normal", "complex"),
              tuple((s, summaries[s].context_fca["normal"], summaries[s].context_fca["complex"]) for s in systems)),
    ]
    meta = {"model": report.model_ref, "threshold": report.threshold, "systems": list(systems)}
    return ReportTables(meta, case_rows, tuple(tables))


def _text_cell(value: Any, precise: bool) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return repr(value) if precise else f"{value:.4f}"
    return str(value)


def _render_json(tables: ReportTables) -> bytes:
    doc = {
        "meta": dict(tables.meta),
        "cases": [dict(c) for c in tables.cases],
        "aggregates": {t.name: t.records() for t in tables.tables if t.name != "cases"},
    }
    return (json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _render_csv(table: Table) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_text_cell(v, True) for v in row])
    return buf.getvalue().encode("utf-8")


def _render_markdown(tables: ReportTables) -> bytes:
    out = ["# OCR accuracy report", ""]
    out.append(f"Model: `{tables.meta['model']}`, pass threshold: {tables.meta['threshold']}")
    for t in tables.tables:
        out += ["", f"## {t.title}", ""]
        out.append("| " + " | ".join(t.columns) + " |")
        out.append("|" + "---|" * len(t.columns))
        for row in t.rows:
            cells = [_text_cell(v, False).replace("|", "\\|") for v in row]
            out.append("| " + " | ".join(cells) + " |")
        if not t.rows:
            out.append("")
            out.append("_no rows_")
    return ("\n".join(out) + "\n").encode("utf-8")


def render_report(tables: ReportTables, fmt: str = "json") -> dict[str, bytes]:
    """Render report tables as files, keyed by file name.

    ``json`` and ``markdown`` give a single file; ``csv`` gives one file per
    table.

    Raises:
        ValueError: for an unknown format.
    """
    if fmt == "json":
        return {"report.json": _render_json(tables)}
    if fmt == "markdown":
        return {"report.md": _render_markdown(tables)}
    if fmt == "csv":
        return {f"{t.name}.csv": _render_csv(t) for t in tables.tables}
    raise ValueError(f"unknown report format {fmt!r}; choose from {', '.join(FORMATS)}")
