"""Run configuration.

A run is described by one JSON document.  Every key is optional except
``datasets`` (which the ``compare``/``profile`` commands need)::

    {
      "run_id": "tourism",
      "field_label": "sightseeing",
      "datasets": [
        {"path": "a.csv", "id": "A", "field_label": "sightseeing",
         "important_variables": ["observed_at"]}
      ],
      "important_variables": [],
      "missing_tokens": ["", "NA", "N/A", "null", "-"],
      "datetime_formats": ["%Y-%m-%d %H:%M:%S", ...],
      "synonym_map": {"temp": "temperature"},
      "geo_column_names": ["latitude", "longitude", "lat", "lon", "lng"],
      "format_rules": {"url": {"columns": ["url"], "pattern": "^https?://\\\\S+$"}},
      "rarity_polarity": "higher_better",
      "output_dir": "out",
      "seed": 0
    }

Relative dataset paths are resolved against the config file's directory.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

DEFAULT_MISSING_TOKENS = ("", "NA", "N/A", "null", "-")

DEFAULT_DATETIME_FORMATS = (
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y/%m/%d %H:%M:%S",
    "%Y/%m/%d %H:%M",
    "%Y-%m-%d",
    "%Y/%m/%d",
)

DEFAULT_GEO_COLUMN_NAMES = ("latitude", "longitude", "lat", "lon", "lng")

DEFAULT_FORMAT_RULES: dict[str, dict[str, Any]] = {
    "url": {
        "columns": ["url", "website", "homepage", "web"],
        "pattern": r"^https?://[^\s/$.?#][^\s]*$",
    },
    "phone": {
        "columns": ["phone", "tel", "telephone", "phone_number", "telephone_number"],
        "pattern": r"^\+?\d[\d\- ()]{4,}\d$",
    },
}

RARITY_POLARITIES = ("higher_better", "lower_better")

_KNOWN_KEYS = {
    "run_id",
    "field_label",
    "datasets",
    "important_variables",
    "missing_tokens",
    "datetime_formats",
    "synonym_map",
    "geo_column_names",
    "format_rules",
    "rarity_polarity",
    "output_dir",
    "seed",
}
_DATASET_KEYS = {"path", "id", "field_label", "important_variables"}


class ConfigError(ValueError):
    """Raised for an invalid run configuration."""


@dataclass(frozen=True)
class FormatRule:
    name: str
    columns: tuple[str, ...]
    pattern: re.Pattern[str]


@dataclass(frozen=True)
class DatasetEntry:
    path: str
    id: str
    field_label: str = ""
    important_variables: tuple[str, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    datasets: tuple[DatasetEntry, ...] = ()
    run_id: str = "run"
    field_label: str = ""
    important_variables: tuple[str, ...] = ()
    missing_tokens: frozenset[str] = frozenset(DEFAULT_MISSING_TOKENS)
    datetime_formats: tuple[str, ...] = DEFAULT_DATETIME_FORMATS
    synonym_map: dict[str, str] = field(default_factory=dict)
    geo_column_names: tuple[str, ...] = DEFAULT_GEO_COLUMN_NAMES
    format_rules: tuple[FormatRule, ...] = field(
        default_factory=lambda: _build_format_rules(DEFAULT_FORMAT_RULES)
    )
    rarity_polarity: str = "higher_better"
    output_dir: str = "."
    seed: int = 0

    def __post_init__(self) -> None:
        ids = [d.id for d in self.datasets]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ConfigError(f"duplicate dataset id(s): {', '.join(dupes)}")
        for d in self.datasets:
            if not d.id:
                raise ConfigError(f"dataset {d.path!r} has an empty id")
            for v in d.important_variables:
                if not v.strip():
                    raise ConfigError(f"dataset {d.id!r}: empty important variable")
        for v in self.important_variables:
            if not v.strip():
                raise ConfigError("empty important variable")
        if self.rarity_polarity not in RARITY_POLARITIES:
            raise ConfigError(
                f"rarity_polarity must be one of {RARITY_POLARITIES}, "
                f"got {self.rarity_polarity!r}"
            )

    def entry(self, dataset_id: str) -> DatasetEntry:
        for d in self.datasets:
            if d.id == dataset_id:
                return d
        raise KeyError(dataset_id)

    def field_label_for(self, entry: DatasetEntry | None) -> str:
        if entry is not None and entry.field_label:
            return entry.field_label
        return self.field_label

    def important_variables_for(self, dataset_id: str) -> tuple[str, ...]:
        try:
            own = self.entry(dataset_id).important_variables
        except KeyError:
            own = ()
        return own or self.important_variables

    def with_overrides(self, **changes: Any) -> RunConfig:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _build_format_rules(raw: dict[str, Any]) -> tuple[FormatRule, ...]:
    rules = []
    for name in sorted(raw):
        spec = raw[name]
        if not isinstance(spec, dict) or "pattern" not in spec:
            raise ConfigError(f"format rule {name!r} needs a 'pattern'")
        try:
            pattern = re.compile(spec["pattern"])
        except re.error as exc:
            raise ConfigError(f"format rule {name!r}: bad pattern: {exc}") from exc
        columns = tuple(str(c) for c in spec.get("columns", ()))
        rules.append(FormatRule(name, columns, pattern))
    return tuple(rules)


def _str_list(data: dict[str, Any], key: str) -> tuple[str, ...] | None:
    if key not in data:
        return None
    value = data[key]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{key!r} must be a list of strings")
    return tuple(value)


def config_from_dict(data: dict[str, Any], base_dir: Path | None = None) -> RunConfig:
    """Validate a decoded JSON config and build a :class:`RunConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    entries = []
    raw_datasets = data.get("datasets", [])
    if not isinstance(raw_datasets, list):
        raise ConfigError("'datasets' must be a list")
    for i, item in enumerate(raw_datasets):
        if not isinstance(item, dict):
            raise ConfigError(f"datasets[{i}] must be an object")
        bad = sorted(set(item) - _DATASET_KEYS)
        if bad:
            raise ConfigError(f"datasets[{i}]: unknown key(s): {', '.join(bad)}")
        if not isinstance(item.get("path"), str) or not item["path"]:
            raise ConfigError(f"datasets[{i}] needs a 'path'")
        path = Path(item["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        important = _str_list(item, "important_variables") or ()
        entries.append(
            DatasetEntry(
                path=str(path),
                id=str(item.get("id") or Path(item["path"]).stem),
                field_label=str(item.get("field_label", "")),
                important_variables=important,
            )
        )

    kwargs: dict[str, Any] = {"datasets": tuple(entries)}
    for key in ("run_id", "field_label", "rarity_polarity", "output_dir"):
        if key in data:
            if not isinstance(data[key], str):
                raise ConfigError(f"{key!r} must be a string")
            kwargs[key] = data[key]
    if "output_dir" in kwargs and base_dir is not None:
        out = Path(kwargs["output_dir"])
        kwargs["output_dir"] = str(out if out.is_absolute() else base_dir / out)
    if "seed" in data:
        if not isinstance(data["seed"], int) or isinstance(data["seed"], bool):
            raise ConfigError("'seed' must be an integer")
        kwargs["seed"] = data["seed"]
    for key in ("important_variables", "datetime_formats", "geo_column_names"):
        value = _str_list(data, key)
        if value is not None:
            kwargs[key] = value
    tokens = _str_list(data, "missing_tokens")
    if tokens is not None:
        kwargs["missing_tokens"] = frozenset(tokens)
    if "synonym_map" in data:
        syn = data["synonym_map"]
        if not isinstance(syn, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in syn.items()
        ):
            raise ConfigError("'synonym_map' must map strings to strings")
        kwargs["synonym_map"] = dict(syn)
    if "format_rules" in data:
        if not isinstance(data["format_rules"], dict):
            raise ConfigError("'format_rules' must be an object")
        kwargs["format_rules"] = _build_format_rules(data["format_rules"])
    return RunConfig(**kwargs)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data, base_dir=path.parent)
