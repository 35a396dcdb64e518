"""Quality metadata documents: canonical JSON and a static HTML report.

The JSON document is the contract.  :func:`render_html` reads nothing
but the document, so a stored ``.quality.json`` re-renders to the same
HTML byte for byte.
"""

from __future__ import annotations

import dataclasses
import html
import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Mapping, Sequence

from qualimeta.config import RunConfig
from qualimeta.indices import QUALITY_INDICES, NotEvaluable, QualityProfile
from qualimeta.ingest import Dataset
from qualimeta.netmetrics import (
    CROSS_FIELD,
    VARIABLE_INDICES,
    CentralityTable,
    VariableNetwork,
    betweenness_centrality,
    build_network,
    degree_centrality,
    same_field,
)

SCHEMA_VERSION = 1
ALL_INDICES = QUALITY_INDICES + VARIABLE_INDICES

HIGHER_BETTER = "higher_better"
LOWER_BETTER = "lower_better"

INDEX_POLARITY = {
    "quantity": HIGHER_BETTER,
    "accuracy": LOWER_BETTER,
    "granularity": LOWER_BETTER,
    "completeness": HIGHER_BETTER,
    "uniqueness": HIGHER_BETTER,
    "precision": HIGHER_BETTER,
    "compliance": HIGHER_BETTER,
    "rarity": HIGHER_BETTER,
    "universality": HIGHER_BETTER,
    "linkage": HIGHER_BETTER,
}

# what each comparison ranks on
INDEX_MEASURE = {
    "quantity": "row count",
    "accuracy": "anomalous cells / non-missing cells",
    "granularity": "median interval of the first important variable",
    "completeness": "non-missing cell ratio",
    "uniqueness": "distinct row ratio",
    "precision": "mean of per-column median significant digits",
    "compliance": "mean format-consistency ratio",
    "rarity": "mean variable rarity (same field)",
    "universality": "mean variable degree centrality (same field)",
    "linkage": "mean variable normalized betweenness (cross field)",
}


class ReportInputError(ValueError):
    """Inputs to :func:`generate` do not describe the same run."""


@dataclass(frozen=True)
class QualityMetadataDocument:
    run_id: str
    generated_at: str
    datasets: list[dict[str, Any]]
    networks: list[dict[str, Any]]
    centrality: dict[str, dict[str, Any]]
    comparison: dict[str, dict[str, Any]]
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


def canonical_json(data: Any) -> str:
    """Sorted keys, shortest round-trip floats, no NaN, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _plain(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ValueError("non-finite value in report")
    return obj


def profile_to_dict(profile: QualityProfile) -> dict[str, Any]:
    return _plain(profile)


def spring_layout(
    network: VariableNetwork, seed: int = 0, iterations: int = 80
) -> dict[str, tuple[float, float]]:
    """Seeded Fruchterman-Reingold layout scaled into [0.05, 0.95]^2."""
    names = sorted(network.nodes)
    n = len(names)
    if n == 0:
        return {}
    if n == 1:
        return {names[0]: (0.5, 0.5)}
    rng = random.Random(seed)
    pos = {v: [rng.random(), rng.random()] for v in names}
    k = math.sqrt(1.0 / n)
    temp = 0.1
    for step in range(iterations):
        disp = {v: [0.0, 0.0] for v in names}
        for i, u in enumerate(names):
            for v in names[i + 1:]:
                dx = pos[u][0] - pos[v][0]
                dy = pos[u][1] - pos[v][1]
                dist = max(math.hypot(dx, dy), 1e-6)
                f = k * k / dist
                disp[u][0] += dx / dist * f
                disp[u][1] += dy / dist * f
                disp[v][0] -= dx / dist * f
                disp[v][1] -= dy / dist * f
        for (u, v), w in sorted(network.edges.items()):
            dx = pos[u][0] - pos[v][0]
            dy = pos[u][1] - pos[v][1]
            dist = max(math.hypot(dx, dy), 1e-6)
            f = dist * dist / k * w
            disp[u][0] -= dx / dist * f
            disp[u][1] -= dy / dist * f
            disp[v][0] += dx / dist * f
            disp[v][1] += dy / dist * f
        t = temp * (1 - step / iterations)
        for v in names:
            dx, dy = disp[v]
            d = max(math.hypot(dx, dy), 1e-9)
            pos[v][0] += dx / d * min(d, t)
            pos[v][1] += dy / d * min(d, t)
    xs = [p[0] for p in pos.values()]
    ys = [p[1] for p in pos.values()]
    span_x = (max(xs) - min(xs)) or 1.0
    span_y = (max(ys) - min(ys)) or 1.0
    return {
        v: (
            round(0.05 + 0.9 * (pos[v][0] - min(xs)) / span_x, 4),
            round(0.05 + 0.9 * (pos[v][1] - min(ys)) / span_y, 4),
        )
        for v in names
    }


def network_to_dict(network: VariableNetwork, seed: int = 0) -> dict[str, Any]:
    degrees = degree_centrality(network)
    bc = betweenness_centrality(network)
    bcn = betweenness_centrality(network, normalized=True)
    layout = spring_layout(network, seed)
    return {
        "scope": network.scope.kind,
        "field_label": network.scope.field_label,
        "name": str(network.scope),
        "dataset_ids": list(network.dataset_ids),
        "nodes": [
            {
                "name": v,
                "occurrence_count": info.occurrence_count,
                "dataset_ids": sorted(info.dataset_ids),
                "degree_centrality": degrees[v].degree_centrality,
                "weighted_degree": degrees[v].weighted_degree,
                "betweenness": bc[v],
                "betweenness_normalized": bcn[v],
                "x": layout[v][0],
                "y": layout[v][1],
            }
            for v, info in sorted(network.nodes.items())
        ],
        "edges": [
            {"source": u, "target": v, "weight": w} for (u, v), w in sorted(network.edges.items())
        ],
    }


def display_networks(datasets: Sequence[Dataset]) -> list[VariableNetwork]:
    """Networks worth drawing: same-field ones with 2+ datasets, cross-field with 2+ fields."""
    labels = Counter(d.field_label for d in datasets)
    nets = [build_network(datasets, same_field(label)) for label in sorted(labels) if labels[label] >= 2]
    if len(labels) >= 2:
        nets.append(build_network(datasets, CROSS_FIELD))
    return nets


def rank(values: Mapping[str, float | None], polarity: str) -> dict[str, Any]:
    """Order dataset ids best-first, grouping exact ties."""
    if polarity not in (HIGHER_BETTER, LOWER_BETTER):
        raise ValueError(f"unknown polarity {polarity!r}")
    scored = {k: v for k, v in values.items() if v is not None}
    sign = -1 if polarity == HIGHER_BETTER else 1
    groups: list[list[str]] = []
    last = None
    for ds in sorted(scored, key=lambda k: (sign * scored[k], k)):
        if groups and scored[ds] == last:
            groups[-1].append(ds)
        else:
            groups.append([ds])
        last = scored[ds]
    return {
        "polarity": polarity,
        "ranking": groups,
        "values": dict(sorted(scored.items())),
        "not_evaluable": sorted(k for k, v in values.items() if v is None),
    }


def flat_ranking(entry: Mapping[str, Any]) -> list[str]:
    return [ds for group in entry["ranking"] for ds in group]


def _metric(profile: QualityProfile, index: str) -> float | None:
    value = getattr(profile, index)
    if isinstance(value, NotEvaluable):
        return None
    return {
        "quantity": lambda q: q.rows,
        "accuracy": lambda a: a.overall_ratio,
        "completeness": lambda c: c.overall,
        "uniqueness": lambda u: u.distinct_row_ratio,
        "precision": lambda p: p.mean_median_significant_digits,
        "compliance": lambda c: c.overall,
    }[index](value)


def _granularity_values(
    profiles: Sequence[QualityProfile], config: RunConfig
) -> tuple[dict[str, float | None], str | None]:
    picks: dict[str, tuple[float, str] | None] = {}
    for p in profiles:
        picks[p.dataset_id] = None
        for entry in p.granularity.values():
            if not isinstance(entry, NotEvaluable):
                picks[p.dataset_id] = (entry.median_interval, entry.unit)
                break
    units = Counter(u for pick in picks.values() if pick for _, u in [pick])
    if not units:
        return {k: None for k in picks}, None
    unit = max(sorted(units), key=lambda u: units[u])
    return {k: (v[0] if v and v[1] == unit else None) for k, v in picks.items()}, unit


def generate(
    datasets: Sequence[Dataset],
    profiles: Sequence[QualityProfile],
    networks: Sequence[VariableNetwork],
    centrality: Mapping[str, CentralityTable],
    config: RunConfig,
    *,
    generated_at: datetime | str | None = None,
    run_id: str | None = None,
    seed: int | None = None,
) -> QualityMetadataDocument:
    ids = [d.id for d in datasets]
    if len(set(ids)) != len(ids):
        raise ReportInputError("duplicate dataset ids")
    if sorted(p.dataset_id for p in profiles) != sorted(ids):
        raise ReportInputError("profiles do not match the datasets of this run")
    if sorted(centrality) != sorted(ids):
        raise ReportInputError("centrality tables do not match the datasets of this run")
    for net in networks:
        if not set(net.dataset_ids) <= set(ids):
            raise ReportInputError(f"network {net.scope} uses datasets outside this run")

    if generated_at is None:
        generated_at = datetime.now(timezone.utc)
    if isinstance(generated_at, datetime):
        generated_at = generated_at.isoformat()
    seed = config.seed if seed is None else seed
    by_profile = {p.dataset_id: p for p in profiles}
    ordered = sorted(datasets, key=lambda d: d.id)

    dataset_docs = []
    for ds in ordered:
        dataset_docs.append({
            "dataset_id": ds.id,
            "name": ds.name,
            "field_label": ds.field_label,
            "row_count": ds.row_count,
            "columns": [
                {
                    "name": c.normalized_name,
                    "raw_name": c.raw_name,
                    "type": c.inferred_type,
                    "missing_count": c.missing_count,
                }
                for c in ds.columns
            ],
            "profile": profile_to_dict(by_profile[ds.id]),
        })

    comparison: dict[str, dict[str, Any]] = {}
    for index in QUALITY_INDICES:
        if index == "granularity":
            values, unit = _granularity_values([by_profile[d.id] for d in ordered], config)
            comparison[index] = rank(values, INDEX_POLARITY[index])
            comparison[index]["unit"] = unit
        else:
            values = {d.id: _metric(by_profile[d.id], index) for d in ordered}
            comparison[index] = rank(values, INDEX_POLARITY[index])
    for index in VARIABLE_INDICES:
        polarity = config.rarity_polarity if index == "rarity" else INDEX_POLARITY[index]
        values = {d.id: centrality[d.id].mean(index) for d in ordered}
        comparison[index] = rank(values, polarity)
    for index, entry in comparison.items():
        entry["measure"] = INDEX_MEASURE[index]

    return QualityMetadataDocument(
        run_id=run_id or config.run_id,
        generated_at=generated_at,
        datasets=dataset_docs,
        networks=[network_to_dict(n, seed) for n in networks],
        centrality={k: _plain(centrality[k]) for k in sorted(centrality)},
        comparison=comparison,
    )


# --- HTML -----------------------------------------------------------------

_CSS = """
body{font-family:system-ui,sans-serif;margin:2em;color:#222;max-width:1100px}
h1{font-size:1.5em}h2{border-bottom:1px solid #ccc;padding-bottom:.2em;margin-top:2em}
table{border-collapse:collapse;margin:.5em 0 1em}
th,td{border:1px solid #ccc;padding:.25em .6em;text-align:left;font-size:.9em}
th{background:#f3f3f3}td.num{text-align:right;font-variant-numeric:tabular-nums}
.na{color:#999;font-style:italic}.meta{color:#666;font-size:.9em}
.cards{display:flex;flex-wrap:wrap;gap:1.5em}.card{flex:1 1 300px}
svg text{font-family:system-ui,sans-serif}
"""


def _e(value: Any) -> str:
    return html.escape(str(value), quote=True)


def _fmt(value: Any) -> str:
    if value is None:
        return '<span class="na">not evaluable</span>'
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return f"{value:.4g}"
    return _e(value)


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]], numeric: set[int] = frozenset()) -> str:
    out = ["<table>", "<tr>" + "".join(f"<th>{_e(h)}</th>" for h in headers) + "</tr>"]
    for row in rows:
        cells = [
            f'<td class="num">{c}</td>' if i in numeric else f"<td>{c}</td>"
            for i, c in enumerate(row)
        ]
        out.append("<tr>" + "".join(cells) + "</tr>")
    out.append("</table>")
    return "\n".join(out)


def _bar_chart(entry: Mapping[str, Any]) -> str:
    values = entry["values"]
    if not values:
        return ""
    order = flat_ranking(entry)
    top = max(abs(v) for v in values.values()) or 1.0
    row_h, label_w, bar_w = 22, 90, 260
    height = row_h * len(order) + 6
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{label_w + bar_w + 70}" '
        f'height="{height}" role="img">'
    ]
    for i, ds in enumerate(order):
        y = 3 + i * row_h
        w = bar_w * abs(values[ds]) / top
        parts.append(f'<text x="0" y="{y + 15}" font-size="12">{_e(ds)}</text>')
        parts.append(
            f'<rect x="{label_w}" y="{y + 3}" width="{w:.2f}" height="{row_h - 8}" fill="#4a7bb7"/>'
        )
        parts.append(
            f'<text x="{label_w + w + 4:.2f}" y="{y + 15}" font-size="11">{_fmt(values[ds])}</text>'
        )
    parts.append("</svg>")
    return "".join(parts)


def _heatmap(ds: Mapping[str, Any]) -> str:
    comp = ds["profile"]["completeness"]
    if comp.get("status") == "not_evaluable":
        return f'<p class="na">{_e(comp["reason"])}</p>'
    grid = comp["missing_grid"]
    cols = [c["name"] for c in ds["columns"]]
    bins = max((len(grid["columns"][c]) for c in cols), default=0)
    cell, label_w = 6, 150
    width = label_w + bins * cell + 10
    height = len(cols) * (cell + 2) + 20
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" role="img">',
        f'<text x="0" y="10" font-size="10">rows per cell: {grid["bin_size"]}; '
        f'red = contains missing</text>',
    ]
    for i, name in enumerate(cols):
        y = 16 + i * (cell + 2)
        parts.append(f'<text x="0" y="{y + cell}" font-size="9">{_e(name)}</text>')
        for j, flag in enumerate(grid["columns"][name]):
            color = "#d9534f" if flag == "1" else "#cfe8cf"
            parts.append(
                f'<rect x="{label_w + j * cell}" y="{y}" width="{cell}" height="{cell}" fill="{color}"/>'
            )
    parts.append("</svg>")
    return "".join(parts)


def _network_svg(net: Mapping[str, Any]) -> str:
    w, h = 560, 420
    pos = {n["name"]: (20 + n["x"] * (w - 40), 20 + n["y"] * (h - 40)) for n in net["nodes"]}
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" role="img">']
    for e in net["edges"]:
        (x1, y1), (x2, y2) = pos[e["source"]], pos[e["target"]]
        parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="#888" stroke-opacity="0.6" stroke-width="{0.5 + 2.5 * e["weight"]:.2f}"/>'
        )
    for n in net["nodes"]:
        x, y = pos[n["name"]]
        r = 3 + 12 * n["degree_centrality"]
        parts.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" fill="#e8a33d" stroke="#7a5314">'
            f'<title>{_e(n["name"])}: degree {n["degree_centrality"]:.3f}, '
            f'betweenness {n["betweenness"]:.3f}</title></circle>'
        )
        parts.append(f'<text x="{x + r + 2:.2f}" y="{y + 3:.2f}" font-size="10">{_e(n["name"])}</text>')
    parts.append("</svg>")
    return "".join(parts)


def render_html(document: QualityMetadataDocument | Mapping[str, Any]) -> str:
    doc = document.to_dict() if isinstance(document, QualityMetadataDocument) else document
    datasets = doc["datasets"]
    body = [
        f"<h1>Quality metadata: {_e(doc['run_id'])}</h1>",
        f'<p class="meta">generated {_e(doc["generated_at"])} · schema version '
        f'{_e(doc["schema_version"])} · {len(datasets)} dataset(s)</p>',
    ]

    body.append("<h2>Datasets</h2>")
    body.append(_table(
        ["dataset", "name", "field", "rows", "columns"],
        [[_e(d["dataset_id"]), _e(d["name"]), _e(d["field_label"]), _fmt(d["row_count"]),
          _fmt(len(d["columns"]))] for d in datasets],
        numeric={3, 4},
    ))

    comparison = doc["comparison"]
    body.append("<h2>Comparison by index</h2>")
    summary_rows = []
    for d in datasets:
        row = [_e(d["dataset_id"])]
        for index in ALL_INDICES:
            if index in comparison:
                row.append(_fmt(comparison[index]["values"].get(d["dataset_id"])))
        summary_rows.append(row)
    shown = [i for i in ALL_INDICES if i in comparison]
    body.append(_table(["dataset"] + shown, summary_rows, numeric=set(range(1, len(shown) + 1))))

    body.append('<div class="cards">')
    for index in shown:
        entry = comparison[index]
        unit = f" ({_e(entry['unit'])})" if entry.get("unit") else ""
        rows = []
        for pos, group in enumerate(entry["ranking"], start=1):
            for ds in group:
                rows.append([str(pos), _e(ds), _fmt(entry["values"][ds])])
        for ds in entry["not_evaluable"]:
            rows.append(["–", _e(ds), _fmt(None)])
        body.append(
            f'<div class="card"><h3>{_e(index)}{unit}</h3>'
            f'<p class="meta">{_e(entry["measure"])}; '
            f'{"higher" if entry["polarity"] == HIGHER_BETTER else "lower"} is better</p>'
            + _table(["rank", "dataset", "value"], rows, numeric={0, 2})
            + _bar_chart(entry)
            + "</div>"
        )
    body.append("</div>")

    body.append("<h2>Completeness: missing-value map</h2>")
    for d in datasets:
        body.append(f"<h3>{_e(d['dataset_id'])}</h3>")
        body.append(_heatmap(d))

    body.append("<h2>Granularity</h2>")
    gran_rows = []
    for d in datasets:
        for var, entry in sorted(d["profile"]["granularity"].items()):
            if entry.get("status") == "not_evaluable":
                gran_rows.append([_e(d["dataset_id"]), _e(var), "", _fmt(None)])
            else:
                gran_rows.append([_e(d["dataset_id"]), _e(var), _e(entry["unit"]),
                                  _fmt(entry["median_interval"])])
    if gran_rows:
        body.append(_table(["dataset", "variable", "unit", "median interval"], gran_rows, numeric={3}))
    else:
        body.append('<p class="na">no important variables configured</p>')

    body.append("<h2>Column detail</h2>")
    for d in datasets:
        prof = d["profile"]
        comp = prof["completeness"].get("per_column", {})
        uniq = prof["uniqueness"].get("per_column", {})
        acc = prof["accuracy"].get("per_column", {})
        cmpl = prof["compliance"].get("per_column", {})
        prec = prof["precision"].get("per_column", {})
        rows = []
        for c in d["columns"]:
            name = c["name"]
            a = acc.get(name)
            p = prec.get(name)
            rows.append([
                _e(name), _e(c["type"]), _fmt(comp.get(name)), _fmt(uniq.get(name)),
                _fmt(a["type_violations"] if a else None),
                _fmt(a["range_outliers"] if a else None),
                _fmt(a["format_violations"] if a else None),
                _fmt(cmpl.get(name)),
                _fmt(p["significant_digits"]["median"]) if p else "",
                _fmt(p["decimal_places"]["median"]) if p else "",
            ])
        body.append(f"<h3>{_e(d['dataset_id'])}</h3>")
        body.append(_table(
            ["column", "type", "completeness", "distinct", "type viol.", "outliers",
             "format viol.", "compliance", "sig. digits (median)", "decimals (median)"],
            rows, numeric=set(range(2, 10)),
        ))
        if prof.get("warnings"):
            body.append("<ul>" + "".join(f"<li>{_e(w)}</li>" for w in prof["warnings"]) + "</ul>")

    body.append("<h2>Variable indices</h2>")
    for ds_id, table in doc["centrality"].items():
        rows = [
            [_e(var), _fmt(s["universality"]), _fmt(s["rarity"]), _fmt(s["linkage"]),
             _fmt(s["weighted_degree"]), _fmt(s["betweenness"])]
            for var, s in table["variables"].items()
        ]
        body.append(f"<h3>{_e(ds_id)} <span class=\"meta\">({_e(table['field_label'])}, "
                    f"{table['same_field_peers']} same-field peer(s))</span></h3>")
        body.append(_table(
            ["variable", "universality", "rarity", "linkage", "weighted degree", "betweenness"],
            rows, numeric={1, 2, 3, 4, 5},
        ))

    if doc["networks"]:
        body.append("<h2>Variable co-occurrence networks</h2>")
        body.append('<p class="meta">node size: degree centrality; edge width: Jaccard weight</p>')
        for net in doc["networks"]:
            body.append(f"<h3>{_e(net['name'])}</h3>")
            body.append(f'<p class="meta">datasets: {_e(", ".join(net["dataset_ids"]))}</p>')
            body.append(_network_svg(net))

    return (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n<head>\n<meta charset="utf-8"/>\n'
        f"<title>Quality metadata: {_e(doc['run_id'])}</title>\n"
        f"<style>{_CSS}</style>\n</head>\n<body>\n"
        + "\n".join(body)
        + "\n</body>\n</html>\n"
    )
