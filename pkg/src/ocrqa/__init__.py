"""Accuracy metrics and model-based test suites for OCR text extraction.

The metrics compare OCR output with hand-written ground truth at the
character, string-segment and line level, independent of reading order
where that matters. The test-model side describes conditions as
classification trees, derives one-factor-at-a-time suites and runs them
in batch.
"""

from .alignment import EditScript, OpKind, character_accuracy, levenshtein, substring_distance
from .errors import InputError, OcrqaError, ParseError, UndefinedScoreError, ValidationError
from .harness import aggregate, load_manifest, render_report, run_suite
from .metrics import MetricConfig, MetricReport, classify_output, evaluate, fca, ossa, ssa, tla
from .testmodel import (
    TestCase,
    TestModel3D,
    build_decision_table,
    check_coverage,
    complexity,
    derive_ofat,
    parse_model,
)
from .textmodel import CharClass, NormalizedText, normalize, parse_ground_truth

__version__ = "0.1.0"

__all__ = [
    "CharClass",
    "EditScript",
    "InputError",
    "MetricConfig",
    "MetricReport",
    "NormalizedText",
    "OcrqaError",
    "OpKind",
    "ParseError",
    "TestCase",
    "TestModel3D",
    "UndefinedScoreError",
    "ValidationError",
    "aggregate",
    "build_decision_table",
    "character_accuracy",
    "check_coverage",
    "classify_output",
    "complexity",
    "derive_ofat",
    "evaluate",
    "fca",
    "levenshtein",
    "load_manifest",
    "normalize",
    "ossa",
    "parse_ground_truth",
    "parse_model",
    "render_report",
    "run_suite",
    "ssa",
    "substring_distance",
    "tla",
]
