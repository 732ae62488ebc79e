"""Regenerate the bundled fixture suite.

Derives the OFAT suite from the bundled model and base case, writes a
synthetic ground-truth receipt for every case (its content follows the
case's input stubs) and the output of two mock OCR systems (their error
rate follows the case's context stubs).

    python3 tools/make_fixture_suite.py [out_dir]

Output is a pure function of the model, so rerunning it reproduces the
committed files byte for byte.
"""

from __future__ import annotations

import random
import sys
import zlib
from pathlib import Path

from ocrqa.harness import dump_manifest
from ocrqa.testmodel import TestCase, bundled_base_case, bundled_model, derive_ofat, is_complex

SYSTEMS = ("scanner_a", "scanner_b")
LOOKALIKES = {"O": "0", "0": "O", "l": "1", "1": "l", "S": "5", "5": "S", "B": "8", "8": "B", "e": "c", ".": ","}
ITEMS = [
    ("BANANAS", 0.95), ("WHOLE MILK", 3.49), ("EGGS LARGE", 4.29), ("SOURDOUGH", 3.99),
    ("AVOCADO", 1.25), ("CHEDDAR", 5.49), ("SPINACH", 2.99), ("COFFEE BEANS", 9.99),
    ("OLIVE OIL", 7.49), ("RICE 2LB", 2.79), ("TOMATOES", 3.19), ("YOGURT", 1.09),
    ("PASTA", 1.49), ("APPLES", 4.59), ("ORANGE JUICE", 3.89),
]
LIST_SIZES = {"items-short": 3, "items-medium": 8, "items-long": 15}
LOGOS = {
    "logo-none": [],
    "logo-text-normal": ["FRESH MART"],
    "logo-text-decorated": ["~*~ Fresh Mart ~*~"],
    "logo-graphic": [],
    "logo-graphic-text": ["FRESH MART"],
    "logo-graphic-decorated": ["-=[ FRESH MART ]=-"],
}


def rng_for(*parts: str) -> random.Random:
    return random.Random(zlib.crc32("/".join(parts).encode()))


def receipt(case: TestCase) -> str:
    sel = case.selections
    spanish = "language-other" in sel
    rnd = rng_for("gt", case.id)

    store = [*next(v for k, v in LOGOS.items() if k in sel), "1600 Market Street", "Springfield, IL 62704"]
    if "contact-present" in sel:
        store += ["Tel (217) 555-0142", "www.freshmart.example"]

    items = []
    size = next(n for k, n in LIST_SIZES.items() if k in sel)
    subtotal = 0.0
    for name, price in rnd.sample(ITEMS, size):
        items.append(f"{name} {price:.2f}")
        subtotal += price
    if "special-present" in sel:
        items += ["2 @ 1.49 LIMES 2.98", "PLU #4011 @ 0.59/lb", "SALE 10% OFF"]
        subtotal += 2.98
    if "discount-present" in sel:
        items.append("COUPON SAVINGS -1.00")
        subtotal -= 1.00

    tax = round(subtotal * 0.0625, 2)
    total = subtotal + tax
    labels = ("Subtotal", "Impuesto", "Total a pagar") if spanish else ("Subtotal", "Tax", "Total")
    transaction = [f"{labels[0]} ${subtotal:.2f}", f"{labels[1]} ${tax:.2f}", f"{labels[2]} ${total:.2f}"]
    if "payment-card" in sel:
        transaction += ["VISA ****4821", "AUTH #004211 APPROVED"]
    else:
        paid = float(int(total) + 1)
        transaction += [f"CASH ${paid:.2f}", f"CHANGE ${paid - total:.2f}"]
    transaction.append(f"Trans:{rnd.randint(1000, 9999)} Reg:{rnd.randint(1, 9)}")

    misc = ["¡Gracias por su compra!" if spanish else "Thank you for shopping!"]
    if "barcode-present" in sel:
        misc.append(" ".join(f"{rnd.randint(0, 9999):04d}" for _ in range(4)))
    if "return-present" in sel:
        misc.append("Devoluciones en 30 días con recibo" if spanish else "Returns within 30 days with receipt")
    if "membership-present" in sel:
        misc.append(f"Member points earned: {rnd.randint(5, 60)}")

    parts = []
    for name, body in (("store", store), ("items", items), ("transaction", transaction), ("misc", misc)):
        parts.append(f"#section: {name}")
        parts += body
    return "\n".join(parts) + "\n"


def _typos(line: str, rate: float, rnd: random.Random) -> str:
    out = []
    for ch in line:
        roll = rnd.random()
        if roll < rate:
            out.append(LOOKALIKES.get(ch, ch))
        elif roll < rate * 1.3 and ch != " ":
            continue
        else:
            out.append(ch)
    return "".join(out)


def scanner_a(lines: list[str], rate: float, rnd: random.Random) -> list[str]:
    """Keeps layout, swaps look-alike characters and swallows some spaces."""
    out = []
    for line in lines:
        line = _typos(line, rate, rnd)
        if " " in line and rnd.random() < rate * 6:
            k = rnd.choice([i for i, ch in enumerate(line) if ch == " "])
            line = line[:k] + line[k + 1:]
        out.append(line)
    return out


def scanner_b(lines: list[str], rate: float, rnd: random.Random) -> list[str]:
    """Breaks wide lines in two and reorders a few lines."""
    out = []
    for line in lines:
        line = _typos(line, rate * 0.7, rnd)
        words = line.split(" ")
        if len(words) > 1 and rnd.random() < 0.04 + rate * 3:
            k = rnd.randint(1, len(words) - 1)
            out += [" ".join(words[:k]), " ".join(words[k:])]
        else:
            out.append(line)
    for _ in range(1 + int(rate * 40)):
        i = rnd.randrange(len(out))
        out.insert(rnd.randrange(len(out)), out.pop(i))
    return out


def error_rate(model, case: TestCase) -> float:
    complex_count = sum(model.stub(s).severity.value == "complex" for s in case.selections)
    return 0.002 + 0.045 * complex_count


def build(out_dir: Path) -> None:
    model = bundled_model()
    cases = []
    for case in derive_ofat(model, bundled_base_case()):
        gt_ref = f"gt/{case.id}.txt"
        gt_text = receipt(case)
        body = [ln for ln in gt_text.splitlines() if not ln.startswith("#section:")]
        refs = {}
        for system, fn in zip(SYSTEMS, (scanner_a, scanner_b)):
            ocr = fn(body, error_rate(model, case), rng_for(system, case.id))
            refs[system] = f"ocr/{system}/{case.id}.txt"
            path = out_dir / refs[system]
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("\n".join(ocr) + "\n", encoding="utf-8")
        (out_dir / gt_ref).parent.mkdir(parents=True, exist_ok=True)
        (out_dir / gt_ref).write_text(gt_text, encoding="utf-8")
        cases.append(TestCase(case.id, case.selections, case.expected_output, gt_ref, refs))
        assert is_complex(model, case) == (error_rate(model, case) > 0.01)
    header = "# Generated by tools/make_fixture_suite.py; do not edit by hand.\n"
    (out_dir / "manifest.yaml").write_text(header + dump_manifest("../model.yaml", SYSTEMS, cases), encoding="utf-8")


if __name__ == "__main__":
    default = Path(__file__).resolve().parent.parent / "src" / "ocrqa" / "data" / "fixture_suite"
    build(Path(sys.argv[1]) if len(sys.argv) > 1 else default)
