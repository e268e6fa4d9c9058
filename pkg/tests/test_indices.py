import logging
import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from peacewords.errors import DataError
from peacewords.indices import (
    DEFAULT_DESCRIPTORS, HIGHER_IS_MORE_PEACEFUL, LOWER_IS_MORE_PEACEFUL, CountryClass, IndexDescriptor, assign_classes, classify_countries, default_index_csv,
    default_labels_csv, outer_group_size, read_index_csv, read_labels_csv, scale_index, scale_table,
    tertile_groups, write_class_csv,
)

REFERENCE = Path(__file__).parent / "data" / "scaled_reference.csv"


def test_scale_examples():
    gpi = scale_index({"Australia": 1.41, "lo": 1.25, "hi": 2.80}, DEFAULT_DESCRIPTORS["GPI"])
    assert round(gpi["Australia"], 2) == 89.68
    hdi = scale_index({"Nigeria": 0.52, "lo": 0.51, "hi": 0.93}, DEFAULT_DESCRIPTORS["HDI"])
    assert round(hdi["Nigeria"], 2) == 2.38
    assert hdi["lo"] == 0.0 and hdi["hi"] == 100.0


def test_bundled_table_scales_to_reference():
    scaled = scale_table(read_index_csv(default_index_csv()))
    ref = read_index_csv(REFERENCE)
    assert scaled.keys() == ref.keys()
    for c, row in ref.items():
        assert scaled[c].keys() == row.keys(), c
        for name, v in row.items():
            assert abs(scaled[c][name] - v) <= 0.01, (c, name, scaled[c][name], v)


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.dictionaries(st.text("abcdefgh", min_size=1, max_size=4), finite, min_size=2, max_size=20))
def test_scale_range_and_direction(values):
    if max(values.values()) - min(values.values()) < 1e-6:
        return
    up = scale_index(values, IndexDescriptor("U", (-1e6, 1e6), HIGHER_IS_MORE_PEACEFUL))
    down = scale_index(values, IndexDescriptor("D", (-1e6, 1e6), LOWER_IS_MORE_PEACEFUL))
    for c in values:
        assert 0.0 <= up[c] <= 100.0 and 0.0 <= down[c] <= 100.0
        assert math.isclose(up[c] + down[c], 100.0, abs_tol=1e-7)


def test_out_of_range_value():
    with pytest.raises(DataError, match="outside range"):
        scale_index({"a": 0.5, "b": 7.0}, DEFAULT_DESCRIPTORS["GPI"])


def test_constant_index_rejected():
    with pytest.raises(DataError):
        scale_index({"a": 1.0, "b": 1.0}, DEFAULT_DESCRIPTORS["HDI"])


@pytest.mark.parametrize("n,sizes", [(18, (6, 6, 6)), (17, (6, 5, 6)), (3, (1, 1, 1)), (16, (6, 4, 6))])
def test_tertile_sizes(n, sizes):
    g = tertile_groups({f"c{i:02d}": float(i) for i in range(n)})
    counts = tuple(sum(1 for v in g.values() if v == k) for k in ("low", "mid", "high"))
    assert counts == sizes
    assert outer_group_size(n) == sizes[0]


def test_tertile_ties_by_country():
    g = tertile_groups({"b": 1.0, "a": 1.0, "c": 1.0})
    assert g == {"a": "low", "b": "mid", "c": "high"}


def test_assign_classes_examples():
    _, groups, classes = classify_countries(read_index_csv(default_index_csv()))
    assert classes["Nigeria"] is CountryClass.LOWER
    assert classes["Australia"] is CountryClass.HIGHER
    assert classes["Hong Kong"] is CountryClass.INTERMEDIATE
    assert set(groups["Hong Kong"]) == {"WHI", "HDI"}


def test_higher_set_matches_labels():
    _, _, classes = classify_countries(read_index_csv(default_index_csv()))
    labels = read_labels_csv(default_labels_csv())
    higher = {c for c, k in classes.items() if k is CountryClass.HIGHER}
    assert higher == {c for c, k in labels.items() if k is CountryClass.HIGHER}
    assert {c for c, k in labels.items() if k is CountryClass.LOWER} == {"Bangladesh", "Kenya", "Nigeria", "Tanzania"}


@given(st.dictionaries(st.sampled_from(list("ABCDEFGH")),
                       st.dictionaries(st.sampled_from(["GPI", "PPI", "WHI", "FSI", "HDI"]),
                                       st.sampled_from(["low", "mid", "high"])), min_size=1))
def test_vote_rule(groups):
    classes = assign_classes(groups)
    for c, g in groups.items():
        lows = sum(v == "low" for v in g.values())
        highs = sum(v == "high" for v in g.values())
        want = CountryClass.LOWER if lows >= 3 else CountryClass.HIGHER if highs >= 3 else CountryClass.INTERMEDIATE
        assert classes[c] is want


def test_all_missing_column_skipped(caplog):
    table = {"a": {"HDI": 0.5}, "b": {"HDI": 0.9}}
    with caplog.at_level(logging.WARNING):
        scaled = scale_table(table)
    assert scaled["a"] == {"HDI": 0.0} and scaled["b"] == {"HDI": 100.0}
    assert "GPI" in caplog.text


def test_labels_round_trip(tmp_path):
    labels = read_labels_csv(default_labels_csv())
    write_class_csv(tmp_path / "c.csv", labels)
    assert read_labels_csv(tmp_path / "c.csv") == labels
    assert (tmp_path / "c.csv").read_bytes() == Path(default_labels_csv()).read_bytes()


def test_parse_class():
    assert CountryClass.parse("higher") is CountryClass.HIGHER
    assert CountryClass.parse("0") is CountryClass.LOWER
    with pytest.raises(DataError):
        CountryClass.parse("purple")
