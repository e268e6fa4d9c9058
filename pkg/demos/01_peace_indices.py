"""Scale five published peace indices to 0..100 and sort 18 countries into three classes.

    python demos/01_peace_indices.py
"""
from peacewords.indices import (
    INDEX_NAMES, CountryClass, classify_countries, compare_classes, default_index_csv,
    default_labels_csv, read_index_csv, read_labels_csv,
)

# %% Raw 2010-2019 averages. GPI, PPI and FSI grow as peace shrinks; WHI and HDI grow with it.
raw = read_index_csv(default_index_csv())
print(f"{len(raw)} countries; Hong Kong has only {sorted(raw['Hong Kong'])}")

# %% Min-max scale each index over these countries, flipping the lower-is-better ones.
scaled, groups, classes = classify_countries(raw)
print(f"\n{'country':16s}" + "".join(f"{n:>8s}" for n in INDEX_NAMES) + "  class")
for c, row in scaled.items():
    cells = "".join(f"{row[n]:8.2f}" if n in row else f"{'':8s}" for n in INDEX_NAMES)
    print(f"{c:16s}{cells}  {classes[c].name.lower()}")

# %% A country needs three of its five indices in the bottom (top) third to count as lower (higher) peace.
# With 18 countries each outer third holds ceil(18/3) = 6. India, the Philippines and Sri Lanka land
# in the bottom third of three or four indices, so the strict rule calls them lower; the reference
# labels keep them intermediate. The labels file is what the models train on.
reference = read_labels_csv(default_labels_csv())
diff = compare_classes(classes, reference)
print("\ncomputed vs reference:", {c: (a.name, b.name) for c, (a, b) in diff.items()})
for k in CountryClass:
    print(f"{k.name.lower():13s}", sorted(c for c, v in reference.items() if v is k))
