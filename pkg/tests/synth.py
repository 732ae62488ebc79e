"""Deterministic synthetic receipt text and OCR-style corruption for tests."""

import random

WORDS = (
    "BANANAS ORGANIC MILK EGGS LARGE BREAD SOURDOUGH CHEESE CHEDDAR APPLES FUJI "
    "COFFEE BEANS YOGURT GREEK SPINACH BABY TOMATOES ROMA CHICKEN THIGHS RICE "
    "JASMINE PASTA PENNE SALMON FILLET BUTTER SALTED OLIVE OIL AVOCADO HASS"
).split()


def receipt_lines(rng, count):
    lines = []
    for _ in range(count):
        kind = rng.random()
        name = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))
        if kind < 0.7:
            lines.append(f"{name} {rng.randint(0, 40)}.{rng.randint(0, 99):02d}")
        elif kind < 0.85:
            lines.append(f"@ {rng.randint(2, 4)} FOR ${rng.randint(1, 9)}.00 #{rng.randint(1000, 9999)}")
        else:
            lines.append(f"Subtotal ${rng.randint(10, 300)}.{rng.randint(0, 99):02d}")
    return lines


def corrupt(rng, lines, rate=0.02):
    """Character confusions, dropped spaces, split and swapped lines."""
    confusions = {"O": "0", "I": "1", "S": "5", "B": "8", "l": "1", "0": "O"}
    out = []
    for line in lines:
        chars = []
        for ch in line:
            r = rng.random()
            if ch == " " and r < 0.1:
                continue
            if r < rate:
                chars.append(confusions.get(ch, ch.lower()))
            else:
                chars.append(ch)
        line = "".join(chars)
        if " " in line and rng.random() < 0.1:
            head, _, tail = line.rpartition(" ")
            out.extend([head, tail])
        else:
            out.append(line)
    for _ in range(len(out) // 10):
        i, j = rng.randrange(len(out)), rng.randrange(len(out))
        out[i], out[j] = out[j], out[i]
    return out


def text_pair(seed, size):
    """GT/OCR texts of roughly ``size`` characters."""
    rng = random.Random(seed)
    lines = []
    while sum(len(x) + 1 for x in lines) < size:
        lines.extend(receipt_lines(rng, 10))
    return "\n".join(lines), "\n".join(corrupt(rng, lines))
