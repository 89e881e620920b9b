import math
from collections import Counter
from dataclasses import dataclass

import pytest
from hypothesis import given, settings, strategies as st

from mcqforge.splitter import stratified_split


@dataclass(frozen=True)
class Row:
    id: str
    country: str | None


def make_rows(counts: dict[str, int]) -> list[Row]:
    rows = []
    for country, n in counts.items():
        rows.extend(Row(id=f"{country}-{i}", country=country) for i in range(n))
    return rows


def per_stratum(ids, rows):
    by_id = {r.id: r for r in rows}
    return Counter((by_id[i].country or "unknown") for i in ids)


def test_even_strata_split_exactly():
    rows = make_rows({"EG": 4, "QA": 2})
    split = stratified_split(rows, 0.5, seed=1)
    assert per_stratum(split.half_a, rows) == {"EG": 2, "QA": 1}
    assert per_stratum(split.half_b, rows) == {"EG": 2, "QA": 1}


def test_synthetic_1926_items_over_22_countries():
    counts = {f"C{i:02d}": 88 for i in range(21)}
    counts["C21"] = 78
    rows = make_rows(counts)
    assert len(rows) == 1926
    split = stratified_split(rows, 0.5, seed=9)
    assert len(split.half_a) == 963 and len(split.half_b) == 963
    a, b = per_stratum(split.half_a, rows), per_stratum(split.half_b, rows)
    for country in counts:
        assert abs(a[country] - b[country]) <= 1
        assert a[country] + b[country] == counts[country]


def test_empty_input():
    split = stratified_split([], 0.5, seed=0)
    assert split.half_a == () and split.half_b == ()


def test_missing_country_forms_unknown_stratum():
    rows = [Row("a", None), Row("b", None), Row("c", "QA"), Row("d", "QA")]
    split = stratified_split(rows, 0.5, seed=0)
    assert per_stratum(split.half_a, rows) == {"unknown": 1, "QA": 1}


def test_seed_determinism_and_sensitivity():
    rows = make_rows({"EG": 9, "QA": 7, "MA": 4})
    one = stratified_split(rows, 0.5, seed=5)
    two = stratified_split(rows, 0.5, seed=5)
    assert one == two
    different = [stratified_split(rows, 0.5, seed=s).half_a for s in range(20)]
    assert len(set(different)) > 1


def test_bad_ratio_rejected():
    with pytest.raises(ValueError):
        stratified_split(make_rows({"EG": 2}), 0.0, seed=0)
    with pytest.raises(ValueError):
        stratified_split(make_rows({"EG": 2}), 1.0, seed=0)


@settings(max_examples=200)
@given(
    counts=st.dictionaries(
        st.text(alphabet="ABCDEFGHIJ", min_size=2, max_size=2),
        st.integers(min_value=0, max_value=40),
        max_size=10,
    ),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_partition_and_balance_properties(counts, seed):
    rows = make_rows(counts)
    split = stratified_split(rows, 0.5, seed)
    a, b = set(split.half_a), set(split.half_b)
    assert not a & b
    assert a | b == {r.id for r in rows}
    stats_a, stats_b = per_stratum(split.half_a, rows), per_stratum(split.half_b, rows)
    for country, n in counts.items():
        assert abs(stats_a[country] - stats_b[country]) <= 1
        assert stats_a[country] == math.ceil(n / 2)
