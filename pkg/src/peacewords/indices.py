"""Country peace indices: 0-100 scaling, tertile groups and class assignment."""
from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import DataError

log = logging.getLogger(__name__)

HIGHER_IS_MORE_PEACEFUL = "higher_raw_is_more_peaceful"
LOWER_IS_MORE_PEACEFUL = "lower_raw_is_more_peaceful"
GROUPS = ("low", "mid", "high")


class CountryClass(enum.IntEnum):
    LOWER = 0
    HIGHER = 1
    INTERMEDIATE = 2

    @classmethod
    def parse(cls, value: str | int) -> "CountryClass":
        if isinstance(value, str):
            v = value.strip().lower()
            if v.isdigit():
                return cls(int(v))
            for member in cls:
                if v == member.name.lower():
                    return member
            raise DataError(f"unknown class label {value!r}")
        return cls(value)


@dataclass(frozen=True)
class IndexDescriptor:
    name: str
    raw_range: tuple[float, float]
    direction: str

    def __post_init__(self):
        if self.direction not in (HIGHER_IS_MORE_PEACEFUL, LOWER_IS_MORE_PEACEFUL):
            raise DataError(f"{self.name}: unknown direction {self.direction!r}")
        if self.raw_range[0] >= self.raw_range[1]:
            raise DataError(f"{self.name}: raw_range must be (low, high)")


DEFAULT_DESCRIPTORS = {
    "GPI": IndexDescriptor("GPI", (1.0, 5.0), LOWER_IS_MORE_PEACEFUL),
    "PPI": IndexDescriptor("PPI", (1.0, 5.0), LOWER_IS_MORE_PEACEFUL),
    "WHI": IndexDescriptor("WHI", (0.0, 10.0), HIGHER_IS_MORE_PEACEFUL),
    "FSI": IndexDescriptor("FSI", (0.0, 120.0), LOWER_IS_MORE_PEACEFUL),
    "HDI": IndexDescriptor("HDI", (0.0, 1.0), HIGHER_IS_MORE_PEACEFUL),
}
INDEX_NAMES = tuple(DEFAULT_DESCRIPTORS)

# country -> index name -> value; absent keys mean "not published"
IndexTable = dict[str, dict[str, float]]


def scale_index(values: Mapping[str, float], descriptor: IndexDescriptor) -> dict[str, float]:
    """Linearly map one index onto 0 (least peaceful) .. 100 (most peaceful).

    The extremes are taken over the supplied countries only.
    """
    if len(values) < 2:
        raise DataError(f"{descriptor.name}: need at least 2 values to scale")
    lo_r, hi_r = descriptor.raw_range
    for c, x in values.items():
        if not lo_r <= x <= hi_r:
            raise DataError(f"{descriptor.name}: {c} value {x} outside range {descriptor.raw_range}")
    lo, hi = min(values.values()), max(values.values())
    if lo == hi:
        raise DataError(f"{descriptor.name}: all values equal, cannot scale")
    span = hi - lo
    # divide before multiplying so the extremes land exactly on 0 and 100
    if descriptor.direction == HIGHER_IS_MORE_PEACEFUL:
        return {c: 100.0 * ((x - lo) / span) for c, x in values.items()}
    return {c: 100.0 * ((hi - x) / span) for c, x in values.items()}


def scale_table(
    table: IndexTable,
    descriptors: Mapping[str, IndexDescriptor] = DEFAULT_DESCRIPTORS,
) -> IndexTable:
    """Scale every index column independently; missing cells stay missing."""
    out: IndexTable = {c: {} for c in table}
    for name, desc in descriptors.items():
        column = {c: v[name] for c, v in table.items() if name in v}
        if not column:
            log.warning("index %s has no values; skipped", name)
            continue
        for c, s in scale_index(column, desc).items():
            out[c][name] = s
    return out


def outer_group_size(n: int, convention: str = "ceil") -> int:
    if convention == "ceil":
        return math.ceil(n / 3)
    if convention == "floor":
        return n // 3
    raise DataError(f"unknown tertile convention {convention!r}")


def tertile_groups(scaled: Mapping[str, float], convention: str = "ceil") -> dict[str, str]:
    """Split countries into low/mid/high thirds of one scaled index.

    Sorted ascending with ties broken by country code. Under the default
    ``ceil`` convention each outer group takes ceil(n/3) countries and the
    middle gets the remainder; ``floor`` gives the outer groups n//3.
    """
    if len(scaled) < 3:
        raise DataError("need at least 3 values for tertiles")
    order = sorted(scaled, key=lambda c: (scaled[c], c))
    n = len(order)
    k = outer_group_size(n, convention)
    groups = {}
    for i, c in enumerate(order):
        groups[c] = "low" if i < k else "high" if i >= n - k else "mid"
    return groups


def group_table(scaled: IndexTable, convention: str = "ceil") -> dict[str, dict[str, str]]:
    """Per-index tertile groups, as country -> index name -> group."""
    names = sorted({n for v in scaled.values() for n in v}, key=_index_order)
    out: dict[str, dict[str, str]] = {c: {} for c in scaled}
    for name in names:
        column = {c: v[name] for c, v in scaled.items() if name in v}
        for c, g in tertile_groups(column, convention).items():
            out[c][name] = g
    return out


def _index_order(name: str):
    return (INDEX_NAMES.index(name), "") if name in INDEX_NAMES else (len(INDEX_NAMES), name)


def assign_classes(groups: Mapping[str, Mapping[str, str]], votes: int = 3) -> dict[str, CountryClass]:
    """Lower if at least ``votes`` indices place a country low, Higher if high, else Intermediate."""
    out = {}
    for c, g in groups.items():
        n_low = sum(1 for v in g.values() if v == "low")
        n_high = sum(1 for v in g.values() if v == "high")
        if n_low >= votes:
            out[c] = CountryClass.LOWER
        elif n_high >= votes:
            out[c] = CountryClass.HIGHER
        else:
            out[c] = CountryClass.INTERMEDIATE
    return out


def classify_countries(
    table: IndexTable,
    descriptors: Mapping[str, IndexDescriptor] = DEFAULT_DESCRIPTORS,
    convention: str = "ceil",
) -> tuple[IndexTable, dict[str, dict[str, str]], dict[str, CountryClass]]:
    """Scale, group and classify in one step."""
    scaled = scale_table(table, descriptors)
    groups = group_table(scaled, convention)
    return scaled, groups, assign_classes(groups)


def compare_classes(computed: Mapping[str, CountryClass], reference: Mapping[str, CountryClass]) -> dict[str, tuple]:
    """Countries whose computed class differs from the reference, as (computed, reference)."""
    diff = {c: (computed.get(c), reference[c]) for c in reference if computed.get(c) != reference[c]}
    for c, (got, want) in sorted(diff.items()):
        log.warning("class divergence for %s: computed %s, reference %s",
                    c, got.name if got is not None else None, want.name)
    return diff


# --- file formats -----------------------------------------------------------

def _resource(name: str) -> Path:
    return Path(str(resources.files("peacewords") / "resources" / name))


def default_index_csv() -> Path:
    """Bundled 2010-2019 index averages for the 18 studied countries."""
    return _resource("peace_indices_2010_2019.csv")


def default_labels_csv() -> Path:
    """Bundled reference class labels for the 18 studied countries."""
    return _resource("peace_classes.csv")


def read_index_csv(path: str | Path) -> IndexTable:
    """Read ``country,<index>,...``; blank cells are missing values."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or reader.fieldnames[0] != "country":
            raise DataError(f"{path}: first column must be 'country'")
        names = reader.fieldnames[1:]
        table: IndexTable = {}
        for lineno, row in enumerate(reader, 2):
            c = row["country"].strip()
            if not c:
                raise DataError(f"{path}:{lineno}: empty country")
            if c in table:
                raise DataError(f"{path}:{lineno}: duplicate country {c}")
            vals = {}
            for n in names:
                cell = (row.get(n) or "").strip()
                if cell:
                    try:
                        vals[n] = float(cell)
                    except ValueError as exc:
                        raise DataError(f"{path}:{lineno}: bad {n} value {cell!r}") from exc
            table[c] = vals
    return table


def write_scaled_csv(path: str | Path, scaled: IndexTable, names=INDEX_NAMES) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", *names])
        for c, v in scaled.items():
            w.writerow([c, *(f"{v[n]:.2f}" if n in v else "" for n in names)])


def write_class_csv(
    path: str | Path,
    classes: Mapping[str, CountryClass],
    groups: Mapping[str, Mapping[str, str]] | None = None,
    names=INDEX_NAMES,
) -> None:
    """Group membership per index (low/mid/high, blank if missing) plus the final class."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if groups is None:
            w.writerow(["country", "class", "label"])
            for c, k in classes.items():
                w.writerow([c, int(k), k.name.lower()])
        else:
            w.writerow(["country", *names, "class", "label"])
            for c, k in classes.items():
                g = groups.get(c, {})
                w.writerow([c, *(g.get(n, "") for n in names), int(k), k.name.lower()])


def read_labels_csv(path: str | Path) -> dict[str, CountryClass]:
    """Read ``country,class`` (extra columns ignored); class is 0/1/2 or lower/higher/intermediate."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or "country" not in reader.fieldnames or "class" not in reader.fieldnames:
            raise DataError(f"{path}: expected columns country,class")
        out = {}
        for row in reader:
            c = row["country"].strip()
            if c in out:
                raise DataError(f"{path}: duplicate country {c}")
            out[c] = CountryClass.parse(row["class"])
    return out
