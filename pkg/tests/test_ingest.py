import pytest
from hypothesis import given, strategies as st

from qualimeta.config import ConfigError, RunConfig, config_from_dict
from qualimeta.ingest import (
    LoadError,
    infer_column_type,
    load_dataset,
    normalize_variable_name,
    parse_datetime,
    parse_number,
    write_raw_csv,
)
from conftest import make_dataset, write_csv


def test_load_three_rows(tmp_path, config):
    path = write_csv(tmp_path / "d.csv", ["a", "b"], [["1", "x"], ["2", "y"], ["3", "z"]])
    ds = load_dataset(path, config)
    assert ds.row_count == 3
    assert [c.normalized_name for c in ds.columns] == ["a", "b"]
    assert ds.id == "d"
    assert ds.field_label == "test"


def test_empty_field_is_missing(config):
    ds = make_dataset(["a", "b"], [["", "1"]])
    cell = ds.column("a").cells[0]
    assert cell.tag == "missing"
    assert ds.column("a").missing_count == 1


def test_majority_integer_keeps_text_cell():
    ds = make_dataset(["n"], [["1"], ["2"], ["x"]])
    col = ds.column("n")
    assert col.inferred_type == "integer"
    assert col.cells[2].tag == "text"
    assert col.cells[2].raw == "x"


@pytest.mark.parametrize("cells, expected", [
    (["2021-01-01 00:00", "2021-01-01 01:00"], "datetime"),
    (["", ""], "text"),
    (["1.5", "2", "abc", "4.0"], "decimal"),
    (["1", "2", "3"], "integer"),
    (["yes", "no", "yes"], "boolean"),
    (["tokyo", "osaka", "1"], "text"),
    # one datetime vs one number: tie goes to datetime
    (["2021-01-01", "5"], "datetime"),
    # one number vs one word: numeric outranks text
    (["5", "five"], "integer"),
])
def test_infer_column_type(cells, expected, config):
    ctype, parsed = infer_column_type(cells, config)
    assert ctype == expected
    assert [c.raw for c in parsed] == cells


def test_geo_columns(config):
    ctype, cells = infer_column_type(["35.68", "91.0", ""], config, "latitude")
    assert ctype == "latitude"
    assert [c.tag for c in cells] == ["geo", "text", "missing"]
    ctype, _ = infer_column_type(["139.7", "-179.9"], config, "lng")
    assert ctype == "longitude"
    ctype, _ = infer_column_type(["north", "south", "1"], config, "lat")
    assert ctype == "text"


@pytest.mark.parametrize("raw, sig, dp", [
    ("3.14", 3, 2),
    ("0.0500", 3, 4),
    ("100", 3, 0),
    ("-0.001", 1, 3),
    ("0", 1, 0),
    ("1.2e3", 2, 0),
    ("1.25e-2", 3, 4),
    (".5", 1, 1),
])
def test_parse_number_precision(raw, sig, dp):
    num = parse_number(raw)
    assert (num.significant_digits, num.decimal_places) == (sig, dp)


@pytest.mark.parametrize("raw", ["", ".", "1.2.3", "5mm", "nan", "inf", "1,000", "e5"])
def test_parse_number_rejects(raw):
    assert parse_number(raw) is None


def test_parse_datetime_first_format_wins():
    value = parse_datetime("2021-01-01 01:00", ["%Y-%m-%d %H:%M", "%Y-%m-%d %H:%M:%S"])
    assert value.format_id == "%Y-%m-%d %H:%M"
    assert value.epoch_seconds == 1609462800.0
    assert parse_datetime("01/02/2021", ["%Y-%m-%d"]) is None


@pytest.mark.parametrize("raw, synonyms, expected", [
    ("  Air Pressure ", {}, "air_pressure"),
    ("temp", {"temp": "temperature"}, "temperature"),
    ("temperature", {}, "temperature"),
    ("Temp", {"temp": "Air Temperature"}, "air_temperature"),
    ("a", {"a": "b", "b": "c"}, "c"),
])
def test_normalize_variable_name(raw, synonyms, expected):
    assert normalize_variable_name(raw, synonyms) == expected


def test_synonym_cycle_rejected():
    with pytest.raises(ConfigError):
        normalize_variable_name("a", {"a": "b", "b": "a"})


@given(st.text(max_size=30), st.dictionaries(
    st.text(alphabet="abcXY _", min_size=1, max_size=4),
    st.text(alphabet="abcXY _", min_size=1, max_size=4),
    max_size=4,
))
def test_normalize_is_idempotent(raw, synonyms):
    try:
        once = normalize_variable_name(raw, synonyms)
    except ConfigError:
        return
    assert normalize_variable_name(once, synonyms) == once


def test_ragged_row_names_row(tmp_path, config):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n3\n", encoding="utf-8")
    with pytest.raises(LoadError, match="row 2"):
        load_dataset(path, config)


def test_duplicate_normalized_columns(tmp_path, config):
    path = write_csv(tmp_path / "dup.csv", ["Air Temp", "air  temp"], [["1", "2"]])
    with pytest.raises(LoadError, match="air_temp"):
        load_dataset(path, config)


def test_unreadable_file(tmp_path, config):
    with pytest.raises(LoadError, match="nope.csv"):
        load_dataset(tmp_path / "nope.csv", config)


def test_non_utf8_rejected(tmp_path, config):
    path = tmp_path / "latin.csv"
    path.write_bytes("name\ncaf\xe9\n".encode("latin-1"))
    with pytest.raises(LoadError, match="UTF-8"):
        load_dataset(path, config)


def test_bom_is_stripped(tmp_path, config):
    path = tmp_path / "bom.csv"
    path.write_bytes("﻿id,value\n1,2\n".encode("utf-8"))
    ds = load_dataset(path, config)
    assert ds.columns[0].raw_name == "id"


def test_missing_tokens_configurable(tmp_path):
    cfg = config_from_dict({"field_label": "x", "missing_tokens": ["?"]})
    ds = make_dataset(["a"], [["?"], ["NA"], [""]], config=cfg)
    assert [c.tag for c in ds.column("a").cells] == ["missing", "text", "missing"]


def test_field_label_from_dataset_entry(tmp_path):
    path = write_csv(tmp_path / "w.csv", ["t"], [["1"]])
    cfg = config_from_dict(
        {"datasets": [{"path": "w.csv", "id": "W", "field_label": "meteorology"}]},
        base_dir=tmp_path,
    )
    ds = load_dataset(path, cfg)
    assert (ds.id, ds.field_label) == ("W", "meteorology")


def test_no_field_label_is_config_error(tmp_path):
    path = write_csv(tmp_path / "w.csv", ["t"], [["1"]])
    with pytest.raises(ConfigError):
        load_dataset(path, RunConfig())


_field = st.text(alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\r\x00"), max_size=8)


@given(st.integers(1, 4).flatmap(
    lambda k: st.tuples(
        st.lists(st.text(alphabet="abcdefgh", min_size=1, max_size=5), min_size=k, max_size=k, unique=True),
        st.lists(st.lists(_field, min_size=k, max_size=k), max_size=8),
    )
))
def test_raw_round_trip(tmp_path_factory, case):
    header, rows = case
    src = tmp_path_factory.mktemp("rt") / "in.csv"
    write_csv(src, header, rows)
    ds = load_dataset(src, RunConfig(field_label="x"))
    assert [list(r) for r in ds.raw_rows()] == rows
    out = src.with_name("out.csv")
    write_raw_csv(ds, out)
    assert out.read_bytes() == src.read_bytes()


@given(st.lists(st.lists(st.sampled_from(["", "NA", "1", "x", "2.5", "-"]), min_size=3, max_size=3), max_size=15))
def test_missing_count_matches_scan(rows):
    ds = make_dataset(["a", "b", "c"], rows)
    tokens = {"", "NA", "N/A", "null", "-"}
    direct = sum(1 for r in rows for v in r if v.strip() in tokens)
    assert sum(c.missing_count for c in ds.columns) == direct
