"""
From classification trees to a test suite
=========================================

The bundled model describes capture conditions (context), receipt content
(input) and expected results (output) as classification trees.
"""

from ocrqa.testmodel import (
    Dimension,
    build_decision_table,
    bundled_base_case,
    bundled_model,
    check_coverage,
    complexity,
    derive_ofat,
    export_table_csv,
)

model = bundled_model()
for tree in model.trees():
    print(tree.dimension.value)
    for cat in tree.categories:
        print("   ", cat.name, [leaf.id for leaf in cat.leaves])

# %%
# Exhaustive testing would need every combination of one leaf per tree.
print(complexity(model))

# %%
# Varying one factor at a time around a base case keeps the suite small
# while still touching every context and input leaf.
suite = derive_ofat(model, bundled_base_case())
print(len(suite), "cases")
coverage = check_coverage(model, suite)
print({d.value: f"{r:.0%}" for d, r in coverage.by_dimension.items()})
print("never expected:", sorted(s for s in coverage.uncovered if model.locate(s)[0] is Dimension.OUTPUT))

# %%
# The decision table marks selected leaves with x and the expected output
# with o. The first few rows:
table = build_decision_table(model, suite)
print("\n".join(export_table_csv(table).decode().splitlines()[:6]))
