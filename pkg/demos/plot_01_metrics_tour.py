"""
Four ways to score one receipt
==============================

A ground-truth receipt and a scanner's output for it, scored at the
character, segment and line level.
"""

from importlib import resources

from ocrqa import evaluate, fca, normalize, ossa, parse_ground_truth, ssa

data = resources.files("ocrqa") / "data" / "sample_receipt"
gt = parse_ground_truth((data / "gt.txt").read_bytes())
ocr = normalize((data / "ocr.txt").read_bytes())
print(ocr)

# %%
# All metrics at once. FCA stays high because it does not care where a
# line ended up; TLA only counts lines reproduced verbatim.
report = evaluate(gt, ocr)
for name, score in report.scores().items():
    print(f"{name.upper():<5} {score:.3f}")
print("result:", report.output_class)

# %%
# Accuracy per character class and per receipt section.
for cls, score in report.per_class.items():
    print(f"{cls.value:<9} {score:.3f}")
for kind, sub in report.per_section.items():
    print(f"{kind.value:<12} fca={sub.fca:.3f} tla={sub.tla:.3f}")

# %%
# The matching trace shows where the FCA errors come from. Two GT lines
# ("BANANAS 0.95" and "Tax $0.00") were each split over two OCR lines, so one
# half of each is left over.
trace = report.traces["fca"]
print("pair errors", trace.pair_errors, "unmatched GT", trace.unmatched_gt_size,
      "leftover OCR", trace.leftover_size)

# %%
# A dropped space costs one character but merges two segments into one,
# which segment-level accuracy punishes much harder.
print(fca("San Jose, CA", "San Jose,CA")[0], ssa("San Jose, CA", "San Jose,CA")[0])

# %%
# Segment order matters only to OSSA.
print(ssa("A B\nC D", "C D\nA B")[0], ossa("A B\nC D", "C D\nA B"))
