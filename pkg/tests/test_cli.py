import io
import json
import subprocess
import sys
from importlib import resources

import pytest

from ocrqa.cli import main

DATA = resources.files("ocrqa") / "data"
MODEL = str(DATA / "model.yaml")
MANIFEST = str(DATA / "fixture_suite" / "manifest.yaml")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def pair(tmp_path):
    gt = tmp_path / "gt.txt"
    gt.write_text("#section: store\nCOSTCO\n#section: transaction\nTax $29.94\n")
    ocr = tmp_path / "ocr.txt"
    ocr.write_text("COSTCO\nTax $29.94\n")
    return gt, ocr


def test_eval_identical(pair):
    gt, ocr = pair
    code, out, _ = run("eval", "--gt", str(gt), "--ocr", str(ocr))
    assert code == 0
    for metric in ("FCA", "SSA", "OSSA", "TLA"):
        assert any(line.split() == [metric, "1.0000"] for line in out.splitlines())
    assert "result pass" in out


def test_eval_json(pair):
    gt, ocr = pair
    code, out, _ = run("eval", "--gt", str(gt), "--ocr", str(ocr), "--format", "json", "--metrics", "fca,tla,section")
    doc = json.loads(out)
    assert code == 0
    assert doc["fca"] == doc["tla"] == 1.0
    assert "ssa" not in doc and "per_class" not in doc
    assert doc["per_section"]["store"] == {"fca": 1.0, "tla": 1.0}
    assert doc["result"] == "pass" and doc["threshold"] == 0.95


def test_eval_empty_gt(tmp_path, pair):
    _, ocr = pair
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    code, _, err = run("eval", "--gt", str(empty), "--ocr", str(ocr))
    assert code == 3
    assert "empty" in err


def test_eval_bad_section_header(tmp_path, pair):
    _, ocr = pair
    bad = tmp_path / "bad.txt"
    bad.write_text("#section: bogus\nx\n")
    code, _, err = run("eval", "--gt", str(bad), "--ocr", str(ocr))
    assert code == 2
    assert "line 1" in err


def test_eval_missing_file(pair):
    gt, _ = pair
    assert run("eval", "--gt", str(gt), "--ocr", "/no/such/file")[0] == 2


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["eval", "--gt", "x"],
    ["eval", "--gt", "/no/such", "--ocr", "/no/such", "--metrics", "wer"],
    ["eval", "--gt", "/no/such", "--ocr", "/no/such", "--threshold", "1.5"],
    ["eval", "--gt", "/no/such", "--ocr", "/no/such", "--format", "xml"],
    ["suite", "run", "/no/such", "--format", "pdf"],
    ["model", "complexity"],
])
def test_usage_errors_exit_1_before_io(argv):
    # the paths do not exist, so exit 1 rather than 2 shows no file was read
    code, _, err = run(*argv)
    assert code == 1
    assert "usage:" in err


def test_threshold_env_and_flag(pair, monkeypatch, tmp_path):
    gt, _ = pair
    ocr = tmp_path / "o.txt"
    ocr.write_text("COSTCO\nTax $29.9")  # fca 17/18
    monkeypatch.setenv("OCRQA_THRESHOLD", "0.9")
    doc = json.loads(run("eval", "--gt", str(gt), "--ocr", str(ocr), "--format", "json")[1])
    assert (doc["threshold"], doc["result"]) == (0.9, "pass")
    doc = json.loads(run("eval", "--gt", str(gt), "--ocr", str(ocr), "--format", "json", "--threshold", "0.99")[1])
    assert (doc["threshold"], doc["result"]) == (0.99, "fail")
    monkeypatch.setenv("OCRQA_THRESHOLD", "high")
    assert run("eval", "--gt", str(gt), "--ocr", str(ocr))[0] == 1


def test_model_complexity():
    assert run("model", "complexity", MODEL) == (0, "CC=14 IC=25 OC=10 total=3500\n", "")
    code, out, _ = run("model", "complexity", MODEL, "--format", "json")
    assert json.loads(out) == {"cc": 14, "ic": 25, "oc": 10, "total": 3500}


def test_model_complexity_bad_model(tmp_path):
    path = tmp_path / "m.yaml"
    path.write_text("context: []\n")
    code, _, err = run("model", "complexity", str(path))
    assert code == 2


def test_model_coverage():
    code, out, _ = run("model", "coverage", MODEL, MANIFEST, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["ratio"]["context"] == doc["ratio"]["input"] == 1.0
    assert doc["uncovered"] == sorted(set(doc["uncovered"]))
    assert "total-fail" in doc["uncovered"]
    code, out, _ = run("model", "coverage", MODEL, MANIFEST)
    assert "context  100.0%" in out


def test_model_ofat_skeleton(tmp_path):
    code, out, _ = run("model", "ofat", MODEL, "--base", str(DATA / "base_case.yaml"), "--systems", "a,b")
    assert code == 0
    skeleton = tmp_path / "skeleton.yaml"
    skeleton.write_text(out)
    code, out, _ = run("model", "coverage", MODEL, str(skeleton), "--format", "json")
    assert code == 0
    assert json.loads(out)["ratio"]["input"] == 1.0
    code, out, _ = run("model", "ofat", MODEL, "--base", str(DATA / "base_case.yaml"), "--format", "json")
    doc = json.loads(out)
    assert len(doc["cases"]) == 24
    assert doc["cases"][1]["ocr"] == {"system": "ocr/system/base+light-dim.txt"}


def test_model_ofat_incomplete_base(tmp_path):
    base = tmp_path / "base.yaml"
    base.write_text("id: b\nselections: [light-normal]\nexpected_output: total-pass\n")
    code, _, err = run("model", "ofat", MODEL, "--base", str(base))
    assert code == 2
    assert "selects nothing" in err


def test_table_export(tmp_path):
    out_path = tmp_path / "table.csv"
    code, out, _ = run("table", "export", MODEL, MANIFEST, "--csv", str(out_path))
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert len(lines) == 50
    assert lines[0].startswith("stub_id,base,base+light-dim,")
    code, out, _ = run("table", "export", MODEL, MANIFEST, "--csv", "-")
    assert out == out_path.read_text()
    code, out, _ = run("table", "export", MODEL, MANIFEST, "--csv", str(out_path), "--format", "json")
    assert json.loads(out) == {"columns": 24, "csv": str(out_path), "rows": 49}


def test_suite_run_formats(tmp_path):
    code, out, err = run("suite", "run", MANIFEST)
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert len(doc["cases"]) == 48
    code, _, _ = run("suite", "run", MANIFEST, "--report", str(tmp_path / "csv"), "--format", "csv")
    assert sorted(p.name for p in (tmp_path / "csv").iterdir()) == [
        "cases.csv", "fca_by_class.csv", "fca_by_context.csv", "fca_by_section.csv",
        "metrics_by_section.csv", "metrics_overall.csv",
    ]
    code, out, _ = run("suite", "run", MANIFEST, "--format", "markdown")
    assert out.startswith("# OCR accuracy report")


def test_suite_run_deterministic(tmp_path):
    run("suite", "run", MANIFEST, "--report", str(tmp_path / "one"))
    run("suite", "run", MANIFEST, "--report", str(tmp_path / "two"), "--jobs", "3")
    assert (tmp_path / "one" / "report.json").read_bytes() == (tmp_path / "two" / "report.json").read_bytes()


def test_suite_run_bad_manifest(tmp_path):
    path = tmp_path / "m.yaml"
    path.write_text(f"model: {MODEL}\ncases: [{{id: c, selections: [nope], expected_output: total-pass}}]\n")
    code, _, err = run("suite", "run", str(path))
    assert code == 2
    assert "nope" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ocrqa", "model", "complexity", MODEL],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout == "CC=14 IC=25 OC=10 total=3500\n"
