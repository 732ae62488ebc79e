"""OCR accuracy metrics.

FCA
    flexible character accuracy: GT lines are matched greedily against OCR
    lines (or pieces of them) wherever they occur, so reading order does
    not matter.
SSA
    the same matching run over string segments mapped to symbols.
OSSA
    plain character accuracy over the segment symbols serialized left to
    right, top to bottom.
TLA
    fraction of GT lines reproduced verbatim as OCR lines.
"""

from __future__ import annotations

import dataclasses
import functools
import heapq
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .alignment import EditScript, levenshtein, substring_cost, substring_distance
from .errors import UndefinedScoreError
from .textmodel import (
    CharClass,
    GroundTruthDoc,
    NormalizedText,
    SectionKind,
    build_symbols,
    filter_by_class,
    normalize,
    parse_ground_truth,
)

METRICS = ("fca", "ssa", "ossa", "tla", "class", "section")
PASS, FAIL = "pass", "fail"


@dataclass(frozen=True)
class MetricConfig:
    pass_threshold: float = 0.95
    clamp_scores: bool = True
    tla_match: str = "exact"
    pass_metric: str = "fca"

    def __post_init__(self):
        if not 0 < self.pass_threshold <= 1:
            raise ValueError(f"pass_threshold must be in (0, 1], got {self.pass_threshold}")
        if self.tla_match != "exact":
            raise ValueError(f"unsupported tla_match mode {self.tla_match!r}")
        if self.pass_metric not in ("fca", "ssa", "ossa", "tla"):
            raise ValueError(f"unknown pass_metric {self.pass_metric!r}")

    def clamp(self, score: float) -> float:
        return max(0.0, score) if self.clamp_scores else score


DEFAULT_CONFIG = MetricConfig()


class MatchedPair(NamedTuple):
    gt_index: int
    ocr_index: int
    span: tuple[int, int]
    error_count: int


class Leftover(NamedTuple):
    ocr_index: int
    span: tuple[int, int]


@dataclass(frozen=True)
class FlexMatchTrace:
    """Outcome of :func:`flex_match`.

    Spans index into the original OCR lines. Leftover OCR pieces count as
    insertion errors unless ``count_leftover`` is false.
    """

    n: int
    pairs: tuple[MatchedPair, ...]
    unmatched_gt: tuple[int, ...]
    unmatched_gt_size: int
    leftover_ocr: tuple[Leftover, ...]
    count_leftover: bool = True

    @property
    def pair_errors(self) -> int:
        return sum(p.error_count for p in self.pairs)

    @property
    def leftover_size(self) -> int:
        return sum(end - start for _, (start, end) in self.leftover_ocr)

    @property
    def error_count(self) -> int:
        extra = self.leftover_size if self.count_leftover else 0
        return self.pair_errors + self.unmatched_gt_size + extra

    @property
    def raw_score(self) -> float:
        if self.n == 0:
            raise UndefinedScoreError("no reference items to score")
        return (self.n - self.error_count) / self.n


def flex_match(
    gt_lines: Sequence[Sequence], ocr_lines: Sequence[Sequence], count_leftover: bool = True
) -> FlexMatchTrace:
    """Greedy order-independent matching of GT lines into OCR lines.

    Each round takes the (GT line, OCR piece) pair with the lowest
    substring distance per GT item. Ties go to the longer GT line, then to
    the lexicographically smaller (GT, OCR) contents; positions never break
    ties, which makes the result invariant under line permutations. The
    matched span (earliest start, then longest among equal-cost spans) is
    cut out of the OCR piece and whatever is left on either side goes back
    into the pool. Rounds stop once every GT line is matched
    or the pool is empty.
    """
    gt_lines = list(gt_lines)
    rows = len(gt_lines)
    lengths = np.array([len(g) for g in gt_lines], dtype=np.int64)
    n = int(lengths.sum())
    if any(length == 0 for length in lengths):
        raise ValueError("GT lines must be non-empty")

    columns: dict = {}
    for line in gt_lines:
        for item in line:
            columns.setdefault(item, len(columns))
    hist = np.zeros((rows, len(columns)), dtype=np.int64)
    for i, line in enumerate(gt_lines):
        for item, count in Counter(line).items():
            hist[i, columns[item]] = count

    # The pool holds distinct OCR contents; each content keeps the places
    # (ocr line index, offset) where an unconsumed copy of it sits.
    contents: list[Sequence] = []
    places: list[list[tuple[int, int]]] = []
    content_id: dict = {}
    capacity = sum(1 for line in ocr_lines if len(line)) + 2 * rows + 1
    bounds = np.empty((rows, capacity))
    alive = np.zeros(capacity, dtype=bool)
    exact: dict[tuple[int, int], float] = {}

    def add_to_pool(index, offset, items):
        cid = content_id.get(items)
        if cid is None:
            cid = content_id[items] = len(contents)
            contents.append(items)
            places.append([])
            counts = Counter(item for item in items if item in columns)
            if counts:
                cols = [columns[item] for item in counts]
                overlap = np.minimum(hist[:, cols], list(counts.values())).sum(axis=1)
            else:
                overlap = 0
            # matched items can never exceed the multiset overlap
            bounds[:, cid] = (lengths - overlap) / lengths
        places[cid].append((index, offset))
        alive[cid] = True
        return cid

    def cost(i, cid):
        key = (i, cid)
        if key not in exact:
            if bounds[i, cid] >= 1.0:
                exact[key] = 1.0
            else:
                exact[key] = substring_cost(gt_lines[i], contents[cid]) / lengths[i]
        return exact[key]

    def best_for(i):
        row = bounds[i]
        candidates = np.flatnonzero(alive[: len(contents)])
        best = None
        for cid in candidates[np.argsort(row[candidates], kind="stable")]:
            if best is not None and row[cid] > best[0]:
                break
            key = (cost(i, cid), contents[cid], int(cid))
            if best is None or key < best:
                best = key
        return best

    for index, line in enumerate(ocr_lines):
        if len(line):
            add_to_pool(index, 0, line)

    matched = np.zeros(rows, dtype=bool)
    version = [0] * rows
    current: list = [None] * rows
    current_norm = np.full(rows, np.inf)
    heap = []

    def push(i, best):
        current[i] = best
        version[i] += 1
        if best is not None:
            norm, items, cid = best
            current_norm[i] = norm
            heapq.heappush(heap, (norm, -lengths[i], gt_lines[i], items, i, cid, version[i]))
        else:
            current_norm[i] = np.inf

    for i in range(rows):
        push(i, best_for(i))

    pairs = []
    remaining = rows
    while heap and remaining and alive.any():
        norm, _, _, items, i, cid, ver = heapq.heappop(heap)
        if matched[i] or ver != version[i]:
            continue
        if not alive[cid]:
            push(i, best_for(i))
            continue

        place = min(places[cid])
        places[cid].remove(place)
        alive[cid] = bool(places[cid])
        index, offset = place
        errors, (start, end) = substring_distance(gt_lines[i], items, longest=True)
        pairs.append(MatchedPair(i, index, (offset + start, offset + end), errors))
        matched[i] = True
        remaining -= 1

        for piece_start, piece in ((0, items[:start]), (end, items[end:])):
            if not len(piece):
                continue
            new = add_to_pool(index, offset + piece_start, piece)
            for j in np.flatnonzero(~matched & (bounds[:, new] <= current_norm)):
                key = (cost(j, new), piece, new)
                if current[j] is None or key < current[j]:
                    push(j, key)

    unmatched = tuple(i for i in range(rows) if not matched[i])
    leftover = tuple(
        Leftover(index, (offset, offset + len(contents[cid])))
        for cid in range(len(contents))
        for index, offset in places[cid]
    )
    trace = FlexMatchTrace(
        n=n,
        pairs=tuple(sorted(pairs)),
        unmatched_gt=unmatched,
        unmatched_gt_size=int(sum(lengths[i] for i in unmatched)),
        leftover_ocr=tuple(sorted(leftover)),
        count_leftover=count_leftover,
    )
    tally = sum(p.error_count for p in pairs) + sum(len(gt_lines[i]) for i in unmatched)
    if count_leftover:
        tally += sum(len(contents[cid]) * len(places[cid]) for cid in range(len(contents)))
    assert trace.error_count == tally, "flex match error accounting is inconsistent"
    return trace


@functools.lru_cache(maxsize=16)
def _flex_cached(gt_lines: tuple, ocr_lines: tuple) -> FlexMatchTrace:
    return flex_match(gt_lines, ocr_lines)


def _flex(gt_lines, ocr_lines, count_leftover):
    trace = _flex_cached(tuple(gt_lines), tuple(ocr_lines))
    if count_leftover:
        return trace
    return dataclasses.replace(trace, count_leftover=False)


def _as_text(value) -> NormalizedText:
    if isinstance(value, NormalizedText):
        return value
    if isinstance(value, GroundTruthDoc):
        return value.full_text
    return normalize(value)


def fca(gt, ocr, config: MetricConfig = DEFAULT_CONFIG, *, count_leftover: bool = True):
    """Flexible character accuracy; returns ``(score, FlexMatchTrace)``."""
    gt, ocr = _as_text(gt), _as_text(ocr)
    if gt.char_count == 0:
        raise UndefinedScoreError("FCA of an empty ground truth is undefined")
    trace = _flex(gt.texts, ocr.texts, count_leftover)
    return config.clamp(trace.raw_score), trace


def ssa(gt, ocr, config: MetricConfig = DEFAULT_CONFIG, *, count_leftover: bool = True):
    """String segment accuracy; returns ``(score, FlexMatchTrace)`` over symbols."""
    gt, ocr = _as_text(gt), _as_text(ocr)
    if gt.segment_count == 0:
        raise UndefinedScoreError("SSA of a ground truth without segments is undefined")
    gt_syms, ocr_syms = build_symbols(gt, ocr)
    trace = _flex(gt_syms.lines, ocr_syms.lines, count_leftover)
    return config.clamp(trace.raw_score), trace


def _ossa_raw(gt: NormalizedText, ocr: NormalizedText, localize: bool):
    if gt.segment_count == 0:
        raise UndefinedScoreError("OSSA of a ground truth without segments is undefined")
    gt_syms, ocr_syms = build_symbols(gt, ocr)
    gt_flat, ocr_flat = gt_syms.flat, ocr_syms.flat
    n = len(gt_flat)
    if localize:
        errors = substring_distance(gt_flat, ocr_flat).error_count
        return (n - errors) / n, None
    script = levenshtein(gt_flat, ocr_flat)
    return (n - script.error_count) / n, script


def ossa(gt, ocr, config: MetricConfig = DEFAULT_CONFIG) -> float:
    """Ordered string segment accuracy in reading order."""
    raw, _ = _ossa_raw(_as_text(gt), _as_text(ocr), localize=False)
    return config.clamp(raw)


def tla(gt, ocr, config: MetricConfig = DEFAULT_CONFIG) -> float:
    """Text-line accuracy r/t with one-to-one exact line matching."""
    gt, ocr = _as_text(gt), _as_text(ocr)
    if not gt.lines:
        raise UndefinedScoreError("TLA of a ground truth without lines is undefined")
    available = Counter(ocr.texts)
    correct = sum(min(count, available[text]) for text, count in Counter(gt.texts).items())
    return correct / len(gt.lines)


def class_accuracy(
    gt, ocr, cls: CharClass, config: MetricConfig = DEFAULT_CONFIG, *, count_leftover: bool = True
) -> float | None:
    """FCA restricted to one character class; None when GT has none of it."""
    gt_part = filter_by_class(_as_text(gt), cls)
    if gt_part.char_count == 0:
        return None
    score, _ = fca(gt_part, filter_by_class(_as_text(ocr), cls), config, count_leftover=count_leftover)
    return score


@dataclass
class MetricReport:
    """Scores for one GT/OCR pair; a metric that was not requested is None.

    ``raw`` holds unclamped values and ``traces`` the matching and edit
    traces behind them.
    """

    fca: float | None = None
    ssa: float | None = None
    ossa: float | None = None
    tla: float | None = None
    per_class: dict[CharClass, float | None] = field(default_factory=dict)
    per_section: dict[SectionKind, "MetricReport | None"] = field(default_factory=dict)
    output_class: str | None = None
    raw: dict[str, float] = field(default_factory=dict)
    traces: dict[str, object] = field(default_factory=dict)

    def scores(self) -> dict[str, float | None]:
        return {"fca": self.fca, "ssa": self.ssa, "ossa": self.ossa, "tla": self.tla}


def classify_output(report: MetricReport, config: MetricConfig = DEFAULT_CONFIG) -> str:
    """``pass`` iff the configured metric (FCA by default) reaches the threshold."""
    score = getattr(report, config.pass_metric)
    if score is None:
        raise UndefinedScoreError(f"cannot classify output: {config.pass_metric} is undefined")
    return PASS if score >= config.pass_threshold else FAIL


def _score_text(gt, ocr, config, wanted, localize):
    report = MetricReport()
    count_leftover = not localize
    if "fca" in wanted:
        report.fca, trace = fca(gt, ocr, config, count_leftover=count_leftover)
        report.raw["fca"], report.traces["fca"] = trace.raw_score, trace
    if "ssa" in wanted:
        report.ssa, trace = ssa(gt, ocr, config, count_leftover=count_leftover)
        report.raw["ssa"], report.traces["ssa"] = trace.raw_score, trace
    if "ossa" in wanted:
        raw, script = _ossa_raw(gt, ocr, localize)
        report.ossa = config.clamp(raw)
        report.raw["ossa"] = raw
        if script is not None:
            report.traces["ossa"] = script
    if "tla" in wanted:
        report.tla = tla(gt, ocr, config)
    if "class" in wanted:
        report.per_class = {
            cls: class_accuracy(gt, ocr, cls, config, count_leftover=count_leftover)
            for cls in CharClass
        }
    if getattr(report, config.pass_metric) is not None:
        report.output_class = classify_output(report, config)
    return report


def section_metrics(
    doc: GroundTruthDoc, ocr, config: MetricConfig = DEFAULT_CONFIG, metrics=METRICS
) -> dict[SectionKind, MetricReport | None]:
    """Score each GT section against the full OCR text.

    OCR output carries no section labels, so each section is located inside
    the whole output: OCR text outside the section is not charged to it, and
    OSSA uses the best-matching stretch of the serialized OCR segments.
    Sections with empty bodies map to None.
    """
    ocr = _as_text(ocr)
    wanted = set(metrics) - {"section"}
    out = {}
    for kind in doc.kinds():
        body = doc.body(kind)
        out[kind] = _score_text(body, ocr, config, wanted, localize=True) if body.lines else None
    return out


def evaluate(gt, ocr, config: MetricConfig = DEFAULT_CONFIG, metrics=METRICS) -> MetricReport:
    """Compute the requested metrics for one GT/OCR pair.

    ``gt`` may be a :class:`GroundTruthDoc`, a :class:`NormalizedText` or
    raw text in the ground-truth file format.
    """
    unknown = set(metrics) - set(METRICS)
    if unknown:
        raise ValueError(f"unknown metrics: {sorted(unknown)}")
    if not isinstance(gt, (GroundTruthDoc, NormalizedText)):
        gt = parse_ground_truth(gt)
    doc = gt if isinstance(gt, GroundTruthDoc) else None
    text = _as_text(gt)
    ocr = _as_text(ocr)
    if not text.lines:
        raise UndefinedScoreError("ground truth is empty")
    report = _score_text(text, ocr, config, set(metrics), localize=False)
    if "section" in metrics and doc is not None:
        report.per_section = section_metrics(doc, ocr, config, metrics)
    return report
