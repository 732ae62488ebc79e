"""
Running a suite against two scanners
====================================

The bundled fixture suite pairs each of the 24 cases with synthetic output
from two mock scanners. One swaps look-alike characters, the other also
breaks lines apart and shuffles them.
"""

from importlib import resources

from ocrqa.harness import aggregate, load_manifest, render_report, run_suite
from ocrqa.metrics import MetricConfig

suite = load_manifest(resources.files("ocrqa") / "data" / "fixture_suite" / "manifest.yaml")
report = run_suite(suite)
tables = aggregate(report, suite.model, suite.cases)

# %%
# Summary tables, skipping the long per-case listing.
markdown = render_report(tables, "markdown")["report.md"].decode()
print(markdown[markdown.index("## FCA by section"):])

# %%
# Complex contexts (dim light, long distance, ...) pull FCA down for both
# systems.
for system, summary in report.summaries.items():
    print(system, {k: round(v, 3) for k, v in summary.context_fca.items()})

# %%
# A looser threshold changes pass rates but no scores.
loose = run_suite(suite, MetricConfig(pass_threshold=0.9))
for system in report.systems:
    print(system, report.summaries[system].pass_rate, "->", loose.summaries[system].pass_rate)
