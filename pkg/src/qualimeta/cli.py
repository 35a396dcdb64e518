"""Command line entry point.

    qualimeta profile --config run.json [--out DIR] [--clock ISO8601]
    qualimeta compare --config run.json [--out DIR] [--seed N] [--clock ISO8601]
    qualimeta survey  --responses r.csv --truth t.json --out analytics.json

Exit codes: 0 success, 1 input/load error, 2 configuration or usage error.
Set ``QUALIMETA_NO_COLOR`` to disable coloured diagnostics.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from qualimeta.analytics import ResponseFormatError, analyze, load_responses, load_truth
from qualimeta.config import ConfigError, RunConfig, load_config
from qualimeta.indices import profile_dataset
from qualimeta.ingest import Dataset, LoadError, load_dataset
from qualimeta.netmetrics import CROSS_FIELD, build_network, same_field, variable_scores
from qualimeta.report import (
    SCHEMA_VERSION,
    QualityMetadataDocument,
    canonical_json,
    display_networks,
    generate,
    profile_to_dict,
    render_html,
)

EXIT_OK, EXIT_LOAD, EXIT_CONFIG = 0, 1, 2


def _color(code: str, text: str) -> str:
    if os.environ.get("QUALIMETA_NO_COLOR") is not None or not sys.stderr.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _error(msg: str) -> None:
    print(_color("31", "error:") + " " + msg, file=sys.stderr)


def _info(msg: str) -> None:
    print(_color("32", "wrote") + " " + msg, file=sys.stderr)


def parse_clock(text: str) -> datetime:
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def load_all(config: RunConfig) -> list[Dataset]:
    return [load_dataset(e.path, config, dataset_id=e.id) for e in config.datasets]


def compare_document(
    datasets: Sequence[Dataset],
    config: RunConfig,
    *,
    generated_at: datetime | str | None = None,
    seed: int | None = None,
) -> QualityMetadataDocument:
    """Profile every dataset, score variables and assemble the run document."""
    profiles = [profile_dataset(d, config) for d in datasets]
    cross = build_network(datasets, CROSS_FIELD)
    same = {label: build_network(datasets, same_field(label))
            for label in {d.field_label for d in datasets}}
    centrality = {
        d.id: variable_scores(
            datasets, d.id, same_field_network=same[d.field_label], cross_field_network=cross
        )
        for d in datasets
    }
    return generate(
        datasets, profiles, display_networks(datasets), centrality, config,
        generated_at=generated_at, seed=seed,
    )


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    return config.with_overrides(
        output_dir=args.out, seed=getattr(args, "seed", None)
    )


def cmd_profile(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    if not config.datasets:
        raise ConfigError("config lists no datasets")
    clock = args.clock.isoformat() if args.clock else datetime.now(timezone.utc).isoformat()
    out_dir = Path(config.output_dir)
    datasets = load_all(config)
    out_dir.mkdir(parents=True, exist_ok=True)
    for ds in datasets:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "generated_at": clock,
            "dataset_id": ds.id,
            "field_label": ds.field_label,
            "source_path": ds.source_path,
            "profile": profile_to_dict(profile_dataset(ds, config)),
        }
        path = out_dir / f"{ds.id}.profile.json"
        path.write_text(canonical_json(doc), encoding="utf-8")
        _info(str(path))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    if len(config.datasets) < 2:
        raise ConfigError(f"compare needs at least 2 datasets, config lists {len(config.datasets)}")
    datasets = load_all(config)
    doc = compare_document(datasets, config, generated_at=args.clock)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{doc.run_id}.quality.json"
    html_path = out_dir / f"{doc.run_id}.report.html"
    json_path.write_text(doc.to_json(), encoding="utf-8")
    html_path.write_text(render_html(doc), encoding="utf-8")
    _info(str(json_path))
    _info(str(html_path))
    return EXIT_OK


def cmd_survey(args: argparse.Namespace) -> int:
    try:
        responses = load_responses(args.responses)
    except ResponseFormatError as exc:
        _error(f"{args.responses}: {exc}")
        return EXIT_LOAD
    try:
        truth = load_truth(args.truth)
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        _error(f"{args.truth}: invalid ground truth: {exc}")
        return EXIT_LOAD
    result = analyze(responses, truth)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(canonical_json(result), encoding="utf-8")
    _info(str(out))
    return EXIT_OK


def _clock_arg(text: str) -> datetime:
    try:
        return parse_clock(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO 8601 timestamp: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qualimeta",
        description="Generate comparative quality metadata for CSV datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p: argparse.ArgumentParser, seed: bool) -> None:
        p.add_argument("--config", required=True, help="run configuration JSON file")
        p.add_argument("--out", help="output directory (overrides output_dir in the config)")
        if seed:
            p.add_argument("--seed", type=int, help="network layout seed (overrides seed in the config)")
        p.add_argument("--clock", type=_clock_arg,
                       help="ISO 8601 timestamp recorded as generated_at (for reproducible output)")

    p = sub.add_parser("profile", help="write one quality profile JSON per dataset")
    run_flags(p, seed=False)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("compare", help="write <run_id>.quality.json and <run_id>.report.html")
    run_flags(p, seed=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("survey", help="score assessment responses against ground truth")
    p.add_argument("--responses", required=True, help="responses CSV file")
    p.add_argument("--truth", required=True, help="ground-truth JSON file")
    p.add_argument("--out", required=True, help="analytics JSON output path")
    p.set_defaults(func=cmd_survey)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _error(str(exc))
        return EXIT_CONFIG
    except LoadError as exc:
        _error(str(exc))
        return EXIT_LOAD
    except OSError as exc:
        _error(str(exc))
        return EXIT_LOAD


if __name__ == "__main__":
    sys.exit(main())
