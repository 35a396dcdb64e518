"""CSV loading, cell parsing and column type inference."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Union

from qualimeta.config import ConfigError, DatasetEntry, RunConfig

COLUMN_TYPES = ("integer", "decimal", "text", "datetime", "latitude", "longitude", "boolean")
CELL_TAGS = ("missing", "text", "number", "datetime", "geo")

BOOLEAN_TOKENS = frozenset({"true", "false", "yes", "no"})

# Tie-break order among column types that receive the same vote count.
_PRECEDENCE = ("datetime", "numeric", "boolean", "text")

_NUMBER_RE = re.compile(r"^[+-]?(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?$")


class LoadError(Exception):
    """A dataset file could not be turned into a :class:`Dataset`."""


@dataclass(frozen=True, slots=True)
class NumberValue:
    value: float
    significant_digits: int
    decimal_places: int
    integral: bool


@dataclass(frozen=True, slots=True)
class DatetimeValue:
    epoch_seconds: float
    format_id: str


@dataclass(frozen=True, slots=True)
class GeoValue:
    degrees: float
    significant_digits: int
    decimal_places: int


Parsed = Union[NumberValue, DatetimeValue, GeoValue, None]


@dataclass(frozen=True, slots=True)
class CellValue:
    tag: str
    raw: str
    parsed: Parsed = None

    @property
    def is_missing(self) -> bool:
        return self.tag == "missing"


@dataclass(frozen=True)
class Column:
    raw_name: str
    normalized_name: str
    inferred_type: str
    cells: tuple[CellValue, ...]

    @property
    def missing_count(self) -> int:
        return sum(1 for c in self.cells if c.tag == "missing")

    @property
    def is_numeric(self) -> bool:
        return self.inferred_type in ("integer", "decimal")

    @property
    def is_geo(self) -> bool:
        return self.inferred_type in ("latitude", "longitude")


@dataclass(frozen=True)
class Dataset:
    id: str
    name: str
    field_label: str
    columns: tuple[Column, ...]
    row_count: int
    source_path: str = ""

    def __post_init__(self) -> None:
        if not self.field_label:
            raise ConfigError(f"dataset {self.id!r} has no field label")
        seen: set[str] = set()
        for col in self.columns:
            if len(col.cells) != self.row_count:
                raise ValueError(
                    f"column {col.raw_name!r} has {len(col.cells)} cells, "
                    f"expected {self.row_count}"
                )
            if col.normalized_name in seen:
                raise LoadError(f"duplicate normalized column name {col.normalized_name!r}")
            seen.add(col.normalized_name)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(c.normalized_name for c in self.columns)

    def column(self, normalized_name: str) -> Column:
        for col in self.columns:
            if col.normalized_name == normalized_name:
                return col
        raise KeyError(normalized_name)

    def raw_rows(self) -> Iterator[tuple[str, ...]]:
        return zip(*(tuple(c.raw for c in col.cells) for col in self.columns))


def normalize_variable_name(raw: str, synonyms: Mapping[str, str] | None = None) -> str:
    """Trim, case-fold and underscore-join a column name, then map synonyms.

    Synonym keys and targets are themselves normalized and chains are
    followed to a fixpoint, which keeps the function idempotent.
    """
    name = "_".join(raw.split()).casefold()
    if not synonyms:
        return name
    table = _synonym_table(tuple(sorted(synonyms.items())))
    seen = {name}
    while name in table:
        name = table[name]
        if name in seen:
            raise ConfigError(f"synonym map contains a cycle through {name!r}")
        seen.add(name)
    return name


@lru_cache(maxsize=64)
def _synonym_table(items: tuple[tuple[str, str], ...]) -> dict[str, str]:
    out = {}
    for key, value in items:
        k = "_".join(key.split()).casefold()
        v = "_".join(value.split()).casefold()
        if k != v:
            out[k] = v
    return out


# strptime directive -> regex used to reject non-matching text cheaply
_DIRECTIVE_RE = {
    "Y": r"\d{4}",
    "y": r"\d{2}",
    "m": r"\d{1,2}",
    "d": r"\d{1,2}",
    "H": r"\d{1,2}",
    "I": r"\d{1,2}",
    "M": r"\d{1,2}",
    "S": r"\d{1,2}",
    "f": r"\d{1,6}",
    "j": r"\d{1,3}",
    "z": r"(?:Z|[+-]\d{2}:?\d{2}(?::?\d{2})?)",
    "p": r"[A-Za-z]+",
    "b": r"[A-Za-z]+",
    "B": r"[A-Za-z]+",
    "a": r"[A-Za-z]+",
    "A": r"[A-Za-z]+",
    "%": "%",
}


@lru_cache(maxsize=256)
def _format_prefilter(fmt: str) -> re.Pattern[str] | None:
    parts = []
    i = 0
    while i < len(fmt):
        ch = fmt[i]
        if ch == "%" and i + 1 < len(fmt):
            pat = _DIRECTIVE_RE.get(fmt[i + 1])
            if pat is None:
                return None
            parts.append(pat)
            i += 2
        else:
            parts.append(re.escape(ch))
            i += 1
    return re.compile("^" + "".join(parts) + "$")


def parse_datetime(text: str, formats: Iterable[str]) -> DatetimeValue | None:
    """First matching format wins; naive timestamps are taken as UTC."""
    for fmt in formats:
        pre = _format_prefilter(fmt)
        if pre is not None and not pre.match(text):
            continue
        try:
            dt = datetime.strptime(text, fmt)
        except ValueError:
            continue
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return DatetimeValue(dt.timestamp(), fmt)
    return None


def parse_number(text: str) -> NumberValue | None:
    """Parse a plain decimal literal, keeping its written precision.

    Significant digits are every mantissa digit after leading zeros;
    trailing zeros count because they were written down.
    """
    m = _NUMBER_RE.match(text)
    if m is None:
        return None
    int_part, frac_part, exp = m.group(1), m.group(2), m.group(3)
    frac_part = frac_part or ""
    if not int_part and not frac_part:
        return None
    value = float(text)
    if not math.isfinite(value):
        return None
    sig = len((int_part + frac_part).lstrip("0")) or 1
    dp = max(0, len(frac_part) - (int(exp) if exp else 0))
    integral = m.group(2) is None and exp is None
    return NumberValue(value, sig, dp, integral)


def _geo_kind(normalized_name: str, geo_names: Iterable[str]) -> str | None:
    if normalized_name not in geo_names:
        return None
    return "latitude" if normalized_name.startswith("lat") else "longitude"


class _CellParser:
    """Classifies raw field text, memoizing on the raw string."""

    def __init__(self, config: RunConfig) -> None:
        self.missing = config.missing_tokens
        self.formats = config.datetime_formats
        self._cache: dict[str, CellValue] = {}

    def __call__(self, raw: str) -> CellValue:
        cell = self._cache.get(raw)
        if cell is None:
            cell = self._classify(raw)
            self._cache[raw] = cell
        return cell

    def _classify(self, raw: str) -> CellValue:
        text = raw.strip()
        if not raw or text in self.missing:
            return CellValue("missing", raw)
        dt = parse_datetime(text, self.formats)
        if dt is not None:
            return CellValue("datetime", raw, dt)
        num = parse_number(text)
        if num is not None:
            return CellValue("number", raw, num)
        return CellValue("text", raw)


def _as_geo(cell: CellValue, limit: float) -> CellValue:
    if cell.tag == "missing":
        return cell
    if cell.tag == "number":
        num = cell.parsed
        if -limit <= num.value <= limit:
            return CellValue("geo", cell.raw, GeoValue(num.value, num.significant_digits, num.decimal_places))
    return CellValue("text", cell.raw)


def cell_kind(cell: CellValue) -> str | None:
    """Most specific type a single non-missing cell supports."""
    if cell.tag == "missing":
        return None
    if cell.tag == "datetime":
        return "datetime"
    if cell.tag == "number":
        return "integer" if cell.parsed.integral else "decimal"
    if cell.tag == "geo":
        return "geo"
    if cell.raw.strip().casefold() in BOOLEAN_TOKENS:
        return "boolean"
    return "text"


def _vote(cells: Iterable[CellValue]) -> str:
    counts = {"datetime": 0, "integer": 0, "decimal": 0, "boolean": 0, "text": 0}
    for cell in cells:
        kind = cell_kind(cell)
        if kind is not None:
            counts[kind] += 1
    groups = {
        "datetime": counts["datetime"],
        "numeric": counts["integer"] + counts["decimal"],
        "boolean": counts["boolean"],
        "text": counts["text"],
    }
    if not any(groups.values()):
        return "text"
    best = max(_PRECEDENCE, key=lambda g: (groups[g], -_PRECEDENCE.index(g)))
    if best == "numeric":
        return "decimal" if counts["decimal"] else "integer"
    return best


def infer_column_type(
    cells: Iterable[str],
    config: RunConfig,
    column_name: str = "",
    _parser: _CellParser | None = None,
) -> tuple[str, list[CellValue]]:
    """Infer a column's type by majority vote over its non-missing cells.

    Returns the type and the per-cell parse outcomes.  Columns whose
    normalized name is a configured geo name become ``latitude`` or
    ``longitude`` when most non-missing values are in-range degrees.
    """
    parse = _parser or _CellParser(config)
    parsed = [parse(raw) for raw in cells]
    geo = _geo_kind(column_name, config.geo_column_names)
    if geo is not None:
        limit = 90.0 if geo == "latitude" else 180.0
        as_geo = [_as_geo(c, limit) for c in parsed]
        n_geo = sum(1 for c in as_geo if c.tag == "geo")
        n_other = sum(1 for c in as_geo if c.tag == "text")
        if n_geo and n_geo >= n_other:
            return geo, as_geo
    return _vote(parsed), parsed


def _entry_for(path: Path, config: RunConfig, dataset_id: str | None) -> DatasetEntry | None:
    if dataset_id is not None:
        try:
            return config.entry(dataset_id)
        except KeyError:
            return None
    for entry in config.datasets:
        if Path(entry.path) == path:
            return entry
    return None


def read_csv_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    """Read header and rows; every row must match the header length."""
    try:
        with open(path, encoding="utf-8-sig", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise LoadError(f"{path}: file is empty (no header row)") from None
            rows = []
            for index, row in enumerate(reader, start=1):
                if not row and len(header) == 1:
                    row = [""]
                if len(row) != len(header):
                    raise LoadError(
                        f"{path}: row {index} (line {reader.line_num}) has "
                        f"{len(row)} fields, expected {len(header)}"
                    )
                rows.append(row)
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise LoadError(f"{path}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc
    except csv.Error as exc:
        raise LoadError(f"{path}: malformed CSV: {exc}") from exc
    return header, rows


def dataset_from_rows(
    header: list[str],
    rows: list[list[str]],
    config: RunConfig,
    *,
    dataset_id: str,
    field_label: str,
    name: str | None = None,
    source_path: str = "",
) -> Dataset:
    """Build a typed dataset from already-split CSV fields."""
    for i, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise LoadError(f"row {i} has {len(row)} fields, header has {len(header)}")
    parser = _CellParser(config)
    columns = []
    seen: dict[str, str] = {}
    for j, raw_name in enumerate(header):
        norm = normalize_variable_name(raw_name, config.synonym_map)
        if norm in seen:
            raise LoadError(
                f"columns {seen[norm]!r} and {raw_name!r} both normalize to {norm!r}"
            )
        seen[norm] = raw_name
        ctype, cells = infer_column_type((r[j] for r in rows), config, norm, parser)
        columns.append(Column(raw_name, norm, ctype, tuple(cells)))
    return Dataset(
        id=dataset_id,
        name=name or dataset_id,
        field_label=field_label,
        columns=tuple(columns),
        row_count=len(rows),
        source_path=source_path,
    )


def load_dataset(
    path: str | Path,
    config: RunConfig,
    *,
    dataset_id: str | None = None,
    field_label: str | None = None,
) -> Dataset:
    """Load one CSV file (UTF-8, single header row) into a typed dataset."""
    path = Path(path)
    entry = _entry_for(path, config, dataset_id)
    ds_id = dataset_id or (entry.id if entry else path.stem)
    label = field_label or config.field_label_for(entry)
    if not label:
        raise ConfigError(f"dataset {ds_id!r}: no field_label configured")
    header, rows = read_csv_rows(path)
    try:
        return dataset_from_rows(
            header, rows, config,
            dataset_id=ds_id, field_label=label, name=path.stem, source_path=str(path),
        )
    except LoadError as exc:
        raise LoadError(f"{path}: {exc}") from None


def write_raw_csv(dataset: Dataset, path: str | Path) -> None:
    """Write the dataset's header and raw field texts back out as CSV."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([c.raw_name for c in dataset.columns])
        writer.writerows(dataset.raw_rows())
