"""Three-dimensional classification test model.

A model has one classification tree per dimension (context, input,
output). Each tree is a list of categories and each category a list of leaf
stubs. Test cases select one leaf per category from the context and input
trees and name one output stub as the expected result.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping

import yaml

from .errors import InputError, ParseError, ValidationError

SELECTED, EXPECTED = "x", "o"


class Dimension(enum.Enum):
    CONTEXT = "context"
    INPUT = "input"
    OUTPUT = "output"


class Severity(enum.Enum):
    NORMAL = "normal"
    COMPLEX = "complex"


@dataclass(frozen=True)
class Stub:
    id: str
    label: str = ""
    severity: Severity = Severity.NORMAL


@dataclass(frozen=True)
class Category:
    name: str
    leaves: tuple[Stub, ...]


@dataclass(frozen=True)
class ClassificationTree:
    dimension: Dimension
    categories: tuple[Category, ...]

    @property
    def leaves(self) -> tuple[Stub, ...]:
        return tuple(leaf for cat in self.categories for leaf in cat.leaves)


@dataclass(frozen=True)
class TestModel3D:
    context: ClassificationTree
    input: ClassificationTree
    output: ClassificationTree

    __test__ = False  # not a pytest class

    def __post_init__(self):
        for dim in Dimension:
            if getattr(self, dim.value).dimension is not dim:
                raise ValidationError(f"tree {dim.value!r} has dimension {getattr(self, dim.value).dimension.value!r}")
        index: dict[str, tuple[Dimension, str, Stub]] = {}
        for tree in self.trees():
            if not tree.categories:
                raise ValidationError(f"{tree.dimension.value} tree has no categories")
            for cat in tree.categories:
                if not cat.leaves:
                    raise ValidationError(f"category {cat.name!r} has no leaves")
                for leaf in cat.leaves:
                    if leaf.id in index:
                        raise ValidationError(f"duplicate stub id {leaf.id!r}")
                    index[leaf.id] = (tree.dimension, cat.name, leaf)
        object.__setattr__(self, "_index", index)

    def trees(self) -> tuple[ClassificationTree, ...]:
        return (self.context, self.input, self.output)

    def stub(self, stub_id: str) -> Stub:
        return self._index[stub_id][2]

    def locate(self, stub_id: str) -> tuple[Dimension, str]:
        """Dimension and category name of a stub; KeyError if unknown."""
        dim, cat, _ = self._index[stub_id]
        return dim, cat

    def stub_ids(self, dimension: Dimension | None = None) -> list[str]:
        trees = self.trees() if dimension is None else (getattr(self, dimension.value),)
        return [leaf.id for tree in trees for leaf in tree.leaves]

    def __contains__(self, stub_id):
        return stub_id in self._index


def _require(node: Any, kind: type, where: str):
    if not isinstance(node, kind):
        raise ParseError(f"expected {kind.__name__}, got {type(node).__name__}", where)
    return node


def _parse_tree(dim: Dimension, node: Any) -> ClassificationTree:
    where = dim.value
    categories = []
    for ci, cat in enumerate(_require(node, list, where)):
        cwhere = f"{where}[{ci}]"
        _require(cat, dict, cwhere)
        name = cat.get("name")
        if not isinstance(name, str) or not name:
            raise ParseError("category needs a non-empty name", f"{cwhere}.name")
        leaves = _require(cat.get("leaves"), list, f"{cwhere}.leaves")
        if not leaves:
            raise ParseError(f"category {name!r} has no leaves", f"{cwhere}.leaves")
        stubs = []
        for li, leaf in enumerate(leaves):
            lwhere = f"{cwhere}.leaves[{li}]"
            _require(leaf, dict, lwhere)
            stub_id = leaf.get("id")
            if not isinstance(stub_id, str) or not stub_id:
                raise ParseError("leaf needs a non-empty id", f"{lwhere}.id")
            try:
                severity = Severity(leaf.get("severity", "normal"))
            except ValueError:
                raise ParseError(f"unknown severity {leaf.get('severity')!r}", f"{lwhere}.severity") from None
            stubs.append(Stub(stub_id, str(leaf.get("label", "")), severity))
        categories.append(Category(name, tuple(stubs)))
    if not categories:
        raise ParseError("tree has no categories", where)
    return ClassificationTree(dim, tuple(categories))


def model_from_dict(data: Mapping) -> TestModel3D:
    """Build a model from an already-decoded document."""
    _require(data, dict, "<root>")
    trees = {}
    for dim in Dimension:
        if dim.value not in data:
            raise ParseError(f"missing {dim.value!r} tree", dim.value)
        trees[dim.value] = _parse_tree(dim, data[dim.value])
    seen: dict[str, str] = {}
    for dim in Dimension:
        for ci, cat in enumerate(trees[dim.value].categories):
            for li, leaf in enumerate(cat.leaves):
                where = f"{dim.value}[{ci}].leaves[{li}].id"
                if leaf.id in seen:
                    raise ParseError(f"duplicate stub id {leaf.id!r} (first at {seen[leaf.id]})", where)
                seen[leaf.id] = where
    return TestModel3D(**trees)


def _load_yaml(data: bytes | str) -> Any:
    try:
        return yaml.safe_load(data)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(str(exc), f"line {mark.line + 1}" if mark else None) from None


def parse_model(data: bytes | str) -> TestModel3D:
    """Parse a model file (YAML with ``context``, ``input`` and ``output`` keys).

    Raises:
        ParseError: on malformed documents, missing trees, empty categories
            or duplicate stub ids. ``location`` is the offending key path.
    """
    return model_from_dict(_load_yaml(data))


def load_model(path: str | Path) -> TestModel3D:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read model {str(path)!r}: {exc.strerror}") from None
    return parse_model(data)


def bundled_model() -> TestModel3D:
    """The example receipt-scanning model shipped with the package."""
    return parse_model((resources.files("ocrqa") / "data" / "model.yaml").read_bytes())


@dataclass(frozen=True)
class TestCase:
    """One column of the decision table.

    Attributes:
        selections: chosen context and input leaf ids.
        expected_output: output stub id.
        gt_ref: ground-truth file path, relative to the manifest.
        ocr_refs: system name to OCR output file path.
    """

    id: str
    selections: frozenset[str]
    expected_output: str
    gt_ref: str = ""
    ocr_refs: Mapping[str, str] = field(default_factory=dict)

    __test__ = False

    def __post_init__(self):
        object.__setattr__(self, "selections", frozenset(self.selections))
        object.__setattr__(self, "ocr_refs", dict(self.ocr_refs))

    def __hash__(self):
        return hash((self.id, self.selections, self.expected_output, self.gt_ref, tuple(sorted(self.ocr_refs.items()))))


def case_from_dict(data: Mapping, where: str = "case") -> TestCase:
    _require(data, dict, where)
    case_id = data.get("id")
    if not isinstance(case_id, str) or not case_id:
        raise ParseError("case needs a non-empty id", f"{where}.id")
    selections = _require(data.get("selections", []), list, f"{where}.selections")
    for k, sel in enumerate(selections):
        _require(sel, str, f"{where}.selections[{k}]")
    expected = data.get("expected_output")
    if not isinstance(expected, str) or not expected:
        raise ParseError("case needs an expected_output stub id", f"{where}.expected_output")
    ocr = _require(data.get("ocr") or {}, dict, f"{where}.ocr")
    return TestCase(case_id, frozenset(selections), expected, str(data.get("gt") or ""),
                    {str(k): str(v) for k, v in ocr.items()})


def parse_case(data: bytes | str) -> TestCase:
    """Parse a single-case file, the format used for OFAT base cases."""
    return case_from_dict(_load_yaml(data))


def bundled_base_case() -> TestCase:
    """Base case for the bundled model: the first leaf of every category."""
    return parse_case((resources.files("ocrqa") / "data" / "base_case.yaml").read_bytes())


def case_to_dict(case: TestCase) -> dict:
    return {
        "id": case.id,
        "selections": sorted(case.selections),
        "expected_output": case.expected_output,
        "gt": case.gt_ref,
        "ocr": dict(sorted(case.ocr_refs.items())),
    }


def validate_case(model: TestModel3D, case: TestCase) -> None:
    """Check a case against the model.

    Raises:
        ValidationError: naming the first unknown stub, a selected output
            stub, an expected output outside the output tree, or a
            category with more than one selected leaf.
    """
    chosen: dict[str, str] = {}
    for stub_id in sorted(case.selections):
        if stub_id not in model:
            raise ValidationError(f"case {case.id!r}: unknown stub {stub_id!r}")
        dim, cat = model.locate(stub_id)
        if dim is Dimension.OUTPUT:
            raise ValidationError(f"case {case.id!r}: output stub {stub_id!r} cannot be selected")
        if cat in chosen:
            raise ValidationError(
                f"case {case.id!r}: category {cat!r} has two leaves ({chosen[cat]!r}, {stub_id!r})"
            )
        chosen[cat] = stub_id
    if case.expected_output not in model:
        raise ValidationError(f"case {case.id!r}: unknown stub {case.expected_output!r}")
    if model.locate(case.expected_output)[0] is not Dimension.OUTPUT:
        raise ValidationError(f"case {case.id!r}: expected output {case.expected_output!r} is not an output stub")


def is_complex(model: TestModel3D, case: TestCase) -> bool:
    return any(model.stub(s).severity is Severity.COMPLEX for s in case.selections)


@dataclass(frozen=True)
class ComplexityReport:
    cc: int
    ic: int
    oc: int

    @property
    def total(self) -> int:
        return self.cc * self.ic * self.oc

    def __str__(self):
        return f"CC={self.cc} IC={self.ic} OC={self.oc} total={self.total}"


def complexity(model: TestModel3D) -> ComplexityReport:
    """Leaf counts per tree; only leaves count as stubs, categories do not."""
    return ComplexityReport(len(model.context.leaves), len(model.input.leaves), len(model.output.leaves))


def derive_ofat(model: TestModel3D, base: TestCase) -> list[TestCase]:
    """One-factor-at-a-time suite around ``base``.

    The result starts with ``base``. Then, for every context and input
    category in model order and every leaf the base does not select, comes a
    copy of the base with that category switched to the leaf. Variant ids are
    ``"<base id>+<leaf id>"``; file references are left empty.

    Raises:
        ValidationError: if the base is invalid or leaves a category unselected.
    """
    validate_case(model, base)
    suite = [base]
    for tree in (model.context, model.input):
        for cat in tree.categories:
            current = [leaf.id for leaf in cat.leaves if leaf.id in base.selections]
            if not current:
                raise ValidationError(f"base case {base.id!r} selects nothing in category {cat.name!r}")
            for leaf in cat.leaves:
                if leaf.id == current[0]:
                    continue
                selections = (base.selections - {current[0]}) | {leaf.id}
                suite.append(TestCase(f"{base.id}+{leaf.id}", selections, base.expected_output))
    return suite


@dataclass(frozen=True)
class CoverageReport:
    covered: frozenset[str]
    uncovered: frozenset[str]
    by_dimension: Mapping[Dimension, float]
    overall: float


def check_coverage(model: TestModel3D, cases: Iterable[TestCase]) -> CoverageReport:
    """Which stubs some case selects or names as its expected output."""
    hit: set[str] = set()
    for case in cases:
        for stub_id in (*case.selections, case.expected_output):
            if stub_id not in model:
                raise ValidationError(f"case {case.id!r}: unknown stub {stub_id!r}")
            hit.add(stub_id)
    everything = set(model.stub_ids())
    ratios = {}
    for dim in Dimension:
        ids = model.stub_ids(dim)
        ratios[dim] = sum(s in hit for s in ids) / len(ids)
    return CoverageReport(frozenset(hit), frozenset(everything - hit), ratios, len(hit) / len(everything))


@dataclass(frozen=True)
class DecisionTable:
    """Stub-by-case matrix; ``cells[r][c]`` is ``"x"``, ``"o"`` or ``""``."""

    rows: tuple[str, ...]
    columns: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.cells) != len(self.rows) or any(len(r) != len(self.columns) for r in self.cells):
            raise ValidationError("decision table cells do not match its shape")
        for c, col in enumerate(self.columns):
            if sum(row[c] == EXPECTED for row in self.cells) != 1:
                raise ValidationError(f"column {col!r} needs exactly one expected-output marker")

    def column(self, case_id: str) -> dict[str, str]:
        c = self.columns.index(case_id)
        return {stub: row[c] for stub, row in zip(self.rows, self.cells) if row[c]}


def build_decision_table(model: TestModel3D, cases: Iterable[TestCase]) -> DecisionTable:
    cases = list(cases)
    for case in cases:
        validate_case(model, case)
    rows = tuple(model.stub_ids())
    cells = []
    for stub_id in rows:
        row = []
        for case in cases:
            if stub_id in case.selections:
                row.append(SELECTED)
            elif stub_id == case.expected_output:
                row.append(EXPECTED)
            else:
                row.append("")
        cells.append(tuple(row))
    return DecisionTable(rows, tuple(c.id for c in cases), tuple(cells))


def export_table_csv(table: DecisionTable) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["stub_id", *table.columns])
    for stub_id, row in zip(table.rows, table.cells):
        writer.writerow([stub_id, *row])
    return buf.getvalue().encode("utf-8")


def import_table_csv(data: bytes | str) -> DecisionTable:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    records = list(csv.reader(io.StringIO(data)))
    if not records or not records[0] or records[0][0] != "stub_id":
        raise ParseError("header must start with 'stub_id'", "line 1")
    header = records[0]
    cells = []
    for lineno, rec in enumerate(records[1:], start=2):
        if len(rec) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(rec)}", f"line {lineno}")
        bad = [v for v in rec[1:] if v not in (SELECTED, EXPECTED, "")]
        if bad:
            raise ParseError(f"unknown cell marker {bad[0]!r}", f"line {lineno}")
        cells.append(tuple(rec[1:]))
    return DecisionTable(tuple(r[0] for r in records[1:]), tuple(header[1:]), tuple(cells))
