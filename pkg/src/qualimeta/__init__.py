"""Automated quality metadata for tabular open data.

Loads CSV datasets, measures seven data-quality indices and three
variable indices, and writes comparative JSON/HTML reports.  The
``analytics`` module scores human assessment responses collected with
those reports.
"""

from qualimeta.config import ConfigError, DatasetEntry, RunConfig, load_config
from qualimeta.ingest import CellValue, Column, Dataset, LoadError, load_dataset
from qualimeta.indices import NotEvaluable, QualityProfile, profile_dataset

__all__ = [
    "CellValue",
    "Column",
    "ConfigError",
    "Dataset",
    "DatasetEntry",
    "LoadError",
    "NotEvaluable",
    "QualityProfile",
    "RunConfig",
    "load_config",
    "load_dataset",
    "profile_dataset",
]

__version__ = "0.1.0"
