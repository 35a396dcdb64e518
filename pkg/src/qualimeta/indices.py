"""The seven per-dataset quality indices.

Every index reports raw measurements.  Grading (which dataset is
better) happens in :mod:`qualimeta.report`, where datasets are compared
side by side.  An index that is undefined for a dataset (no rows, no
numeric columns, ...) is recorded as :class:`NotEvaluable` rather than
as a made-up number.
"""

from __future__ import annotations

import logging
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from qualimeta.config import RunConfig
from qualimeta.ingest import BOOLEAN_TOKENS, CellValue, Column, Dataset, normalize_variable_name

log = logging.getLogger(__name__)

QUALITY_INDICES = (
    "quantity",
    "accuracy",
    "granularity",
    "completeness",
    "uniqueness",
    "precision",
    "compliance",
)

EARTH_RADIUS_KM = 6371.0088
IQR_FENCE = 3.0
MAX_GRID_BINS = 100


class NotEvaluableError(ValueError):
    """The metric is undefined for this input."""


@dataclass(frozen=True)
class NotEvaluable:
    reason: str
    status: str = "not_evaluable"


@dataclass(frozen=True)
class Quantity:
    rows: int
    non_missing_cells: int


@dataclass(frozen=True)
class MissingGrid:
    """Row-binned missing map; ``'1'`` marks a bin holding a missing cell."""

    bin_size: int
    columns: dict[str, str]


@dataclass(frozen=True)
class Completeness:
    overall: float
    per_column: dict[str, float]
    missing_grid: MissingGrid


@dataclass(frozen=True)
class Uniqueness:
    distinct_row_ratio: float
    per_column: dict[str, float]


@dataclass(frozen=True)
class Summary:
    min: float
    median: float
    max: float


@dataclass(frozen=True)
class PrecisionStats:
    count: int
    significant_digits: Summary
    decimal_places: Summary


@dataclass(frozen=True)
class Precision:
    per_column: dict[str, PrecisionStats]
    mean_median_significant_digits: float
    excluded: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class AnomalyCounts:
    type_violations: int = 0
    range_outliers: int = 0
    format_violations: int = 0


@dataclass(frozen=True)
class Accuracy:
    per_column: dict[str, AnomalyCounts]
    anomalous_cells: int
    overall_ratio: float


@dataclass(frozen=True)
class Compliance:
    per_column: dict[str, float]
    overall: float


@dataclass(frozen=True)
class GranularityEntry:
    unit: str
    median_interval: float
    n_values: int


@dataclass(frozen=True)
class QualityProfile:
    dataset_id: str
    quantity: Quantity
    completeness: Completeness | NotEvaluable
    uniqueness: Uniqueness | NotEvaluable
    precision: Precision | NotEvaluable
    accuracy: Accuracy | NotEvaluable
    compliance: Compliance | NotEvaluable
    granularity: dict[str, GranularityEntry | NotEvaluable]
    warnings: list[str] = field(default_factory=list)


def _non_missing(col: Column) -> list[CellValue]:
    return [c for c in col.cells if c.tag != "missing"]


def quantity(dataset: Dataset) -> Quantity:
    total = dataset.row_count * len(dataset.columns)
    missing = sum(col.missing_count for col in dataset.columns)
    return Quantity(dataset.row_count, total - missing)


def completeness(dataset: Dataset) -> Completeness:
    n = dataset.row_count
    if n == 0:
        raise NotEvaluableError("dataset has no rows")
    if not dataset.columns:
        raise NotEvaluableError("dataset has no columns")
    per_column = {}
    missing_total = 0
    for col in dataset.columns:
        missing_total += col.missing_count
        per_column[col.normalized_name] = 1.0 - col.missing_count / n
    overall = (n * len(dataset.columns) - missing_total) / (n * len(dataset.columns))
    return Completeness(overall, per_column, missing_grid(dataset))


def missing_grid(dataset: Dataset, max_bins: int = MAX_GRID_BINS) -> MissingGrid:
    bin_size = max(1, math.ceil(dataset.row_count / max_bins))
    columns = {}
    for col in dataset.columns:
        flags = []
        for start in range(0, dataset.row_count, bin_size):
            chunk = col.cells[start:start + bin_size]
            flags.append("1" if any(c.tag == "missing" for c in chunk) else "0")
        columns[col.normalized_name] = "".join(flags)
    return MissingGrid(bin_size, columns)


def uniqueness(dataset: Dataset) -> Uniqueness:
    n = dataset.row_count
    if n == 0:
        raise NotEvaluableError("dataset has no rows")
    distinct_rows = len(set(dataset.raw_rows()))
    per_column = {
        col.normalized_name: len({c.raw for c in col.cells}) / n for col in dataset.columns
    }
    return Uniqueness(distinct_rows / n, per_column)


def _summary(values: Sequence[float]) -> Summary:
    return Summary(min(values), statistics.median(values), max(values))


def precision(dataset: Dataset) -> Precision:
    """Significant-digit and decimal-place spread of numeric and geo columns."""
    candidates = [c for c in dataset.columns if c.is_numeric or c.is_geo]
    if not candidates:
        raise NotEvaluableError("no numeric columns")
    per_column = {}
    excluded = []
    for col in candidates:
        parsed = [c.parsed for c in col.cells if c.tag in ("number", "geo")]
        if not parsed:
            log.warning("%s: column %r has no numeric cells", dataset.id, col.raw_name)
            excluded.append(col.normalized_name)
            continue
        per_column[col.normalized_name] = PrecisionStats(
            count=len(parsed),
            significant_digits=_summary([p.significant_digits for p in parsed]),
            decimal_places=_summary([p.decimal_places for p in parsed]),
        )
    if not per_column:
        raise NotEvaluableError("no numeric cells in numeric columns")
    score = statistics.fmean(s.significant_digits.median for s in per_column.values())
    return Precision(per_column, score, excluded)


def quantile(sorted_values: Sequence[float], q: float) -> float:
    """Linear interpolation between closest ranks (position ``q*(n-1)``)."""
    if not sorted_values:
        raise ValueError("quantile of empty sequence")
    pos = q * (len(sorted_values) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(sorted_values) - 1)
    frac = pos - lo
    return sorted_values[lo] + (sorted_values[hi] - sorted_values[lo]) * frac


def outlier_fences(values: Iterable[float], k: float = IQR_FENCE) -> tuple[float, float]:
    ordered = sorted(values)
    q1 = quantile(ordered, 0.25)
    q3 = quantile(ordered, 0.75)
    iqr = q3 - q1
    return q1 - k * iqr, q3 + k * iqr


def _type_ok(cell: CellValue, ctype: str) -> bool:
    if ctype == "text":
        return True
    if ctype == "integer":
        return cell.tag == "number" and cell.parsed.integral
    if ctype == "decimal":
        return cell.tag == "number"
    if ctype == "datetime":
        return cell.tag == "datetime"
    if ctype in ("latitude", "longitude"):
        return cell.tag == "geo"
    if ctype == "boolean":
        return cell.raw.strip().casefold() in BOOLEAN_TOKENS
    raise ValueError(f"unknown column type {ctype!r}")


def accuracy(dataset: Dataset, config: RunConfig) -> Accuracy:
    """Count type violations, IQR range outliers and pattern-rule failures.

    A cell caught by more than one rule family is counted once in
    ``anomalous_cells``, so ``overall_ratio`` stays within [0, 1].
    """
    non_missing_total = sum(dataset.row_count - c.missing_count for c in dataset.columns)
    if dataset.row_count == 0 or non_missing_total == 0:
        raise NotEvaluableError("dataset has no values")
    per_column = {}
    anomalous = 0
    for col in dataset.columns:
        flagged: set[int] = set()
        type_bad = [
            i for i, c in enumerate(col.cells)
            if c.tag != "missing" and not _type_ok(c, col.inferred_type)
        ]
        flagged.update(type_bad)

        outliers: list[int] = []
        if col.is_numeric:
            nums = [(i, c.parsed.value) for i, c in enumerate(col.cells) if c.tag == "number"]
            if len(nums) >= 4:
                lo, hi = outlier_fences(v for _, v in nums)
                outliers = [i for i, v in nums if v < lo or v > hi]
        flagged.update(outliers)

        fmt_bad: set[int] = set()
        for rule in config.format_rules:
            if col.normalized_name not in rule.columns:
                continue
            fmt_bad.update(
                i for i, c in enumerate(col.cells)
                if c.tag != "missing" and not rule.pattern.match(c.raw.strip())
            )
        flagged.update(fmt_bad)

        per_column[col.normalized_name] = AnomalyCounts(len(type_bad), len(outliers), len(fmt_bad))
        anomalous += len(flagged)
    return Accuracy(per_column, anomalous, anomalous / non_missing_total)


def compliance(dataset: Dataset, config: RunConfig | None = None) -> Compliance:
    """Share of each column's values written in its dominant format.

    Datetime columns: cells in the modal strptime pattern.  Numeric and
    geo columns: cells that are bare numbers (no unit text).  Text and
    boolean columns score 1.0.  Columns with no values are not scored.
    """
    order = {fmt: i for i, fmt in enumerate(config.datetime_formats)} if config else {}
    per_column = {}
    for col in dataset.columns:
        cells = _non_missing(col)
        if not cells:
            continue
        if col.inferred_type == "datetime":
            formats = Counter(c.parsed.format_id for c in cells if c.tag == "datetime")
            if formats:
                top = max(formats.values())
                modal = min(
                    (f for f, n in formats.items() if n == top),
                    key=lambda f: (order.get(f, len(order)), f),
                )
                matched = formats[modal]
            else:
                matched = 0
            per_column[col.normalized_name] = matched / len(cells)
        elif col.is_numeric or col.is_geo:
            bare = sum(1 for c in cells if c.tag in ("number", "geo"))
            per_column[col.normalized_name] = bare / len(cells)
        else:
            per_column[col.normalized_name] = 1.0
    if not per_column:
        raise NotEvaluableError("no column has values")
    return Compliance(per_column, statistics.fmean(per_column.values()))


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def nearest_neighbor_distances_km(points: Sequence[tuple[float, float]]) -> list[float]:
    """Great-circle distance from each point to its nearest other point."""
    import numpy as np
    from scipy.spatial import cKDTree

    lat = np.radians([p[0] for p in points])
    lon = np.radians([p[1] for p in points])
    xyz = np.column_stack((np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)))
    # Chord length is monotone in arc length, so the chord-nearest point
    # is also the great-circle-nearest point.
    _, idx = cKDTree(xyz).query(xyz, k=2)
    out = []
    for i, (a, b) in enumerate(idx):
        j = int(b) if int(a) == i else int(a)
        out.append(haversine_km(points[i][0], points[i][1], points[j][0], points[j][1]))
    return out


def _geo_points(dataset: Dataset) -> list[tuple[float, float]]:
    lat = next(c for c in dataset.columns if c.inferred_type == "latitude")
    lon = next(c for c in dataset.columns if c.inferred_type == "longitude")
    return [
        (a.parsed.degrees, b.parsed.degrees)
        for a, b in zip(lat.cells, lon.cells)
        if a.tag == "geo" and b.tag == "geo"
    ]


def granularity(
    dataset: Dataset,
    important_variables: Iterable[str],
    synonyms: dict[str, str] | None = None,
) -> dict[str, GranularityEntry | NotEvaluable]:
    """Median spacing of each important variable.

    Datetime variables give the median gap in seconds between sorted
    timestamps.  A latitude or longitude variable gives the median
    nearest-neighbour distance in km over the dataset's (lat, lon) pairs.
    Variables absent from the dataset are skipped with a warning.
    """
    out: dict[str, GranularityEntry | NotEvaluable] = {}
    types = {c.normalized_name: c.inferred_type for c in dataset.columns}
    for raw in important_variables:
        name = normalize_variable_name(raw, synonyms)
        if name in out:
            continue
        if name not in types:
            log.warning("%s: important variable %r not present", dataset.id, raw)
            continue
        ctype = types[name]
        if ctype == "datetime":
            stamps = sorted(
                c.parsed.epoch_seconds for c in dataset.column(name).cells if c.tag == "datetime"
            )
            if len(stamps) < 2:
                out[name] = NotEvaluable("fewer than 2 timestamps")
                continue
            gaps = [b - a for a, b in zip(stamps, stamps[1:])]
            out[name] = GranularityEntry("seconds", statistics.median(gaps), len(stamps))
        elif ctype in ("latitude", "longitude"):
            if not {"latitude", "longitude"} <= set(types.values()):
                out[name] = NotEvaluable("needs both a latitude and a longitude column")
                continue
            points = _geo_points(dataset)
            if len(points) < 2:
                out[name] = NotEvaluable("fewer than 2 coordinate pairs")
                continue
            dists = nearest_neighbor_distances_km(points)
            out[name] = GranularityEntry("kilometers", statistics.median(dists), len(points))
        else:
            out[name] = NotEvaluable(f"column type {ctype} has no temporal or spatial spacing")
    return out


def _guard(fn, *args):
    try:
        return fn(*args)
    except NotEvaluableError as exc:
        return NotEvaluable(str(exc))


def profile_dataset(
    dataset: Dataset,
    config: RunConfig,
    important_variables: Iterable[str] | None = None,
) -> QualityProfile:
    if important_variables is None:
        important_variables = config.important_variables_for(dataset.id)
    important_variables = list(important_variables)
    warnings = []
    prec = _guard(precision, dataset)
    if isinstance(prec, Precision):
        warnings += [f"precision: column {c!r} has no numeric cells" for c in prec.excluded]
    present = dataset.variables
    for raw in important_variables:
        if normalize_variable_name(raw, config.synonym_map) not in present:
            warnings.append(f"granularity: important variable {raw!r} not present")
    return QualityProfile(
        dataset_id=dataset.id,
        quantity=quantity(dataset),
        completeness=_guard(completeness, dataset),
        uniqueness=_guard(uniqueness, dataset),
        precision=prec,
        accuracy=_guard(accuracy, dataset, config),
        compliance=_guard(compliance, dataset, config),
        granularity=granularity(dataset, important_variables, config.synonym_map),
        warnings=warnings,
    )
