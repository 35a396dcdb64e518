"""Acceptance gate: one test per headline criterion.

Each test carries ``@pytest.mark.acceptance(name)``; the terminal summary
prints a PASS/FAIL line per criterion.
"""

import json
import os
import random
import subprocess
import sys
import time
from collections import deque
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from qualimeta.analytics import (
    AssessmentResponse,
    GroundTruthMatrix,
    coefficient_of_variation,
    false_answer_rate,
    fisher_exact_2x2,
    simpsons_diversity,
)
from qualimeta.cli import main
from qualimeta.config import RunConfig
from qualimeta.indices import accuracy, completeness, granularity, uniqueness
from qualimeta.netmetrics import VariableNetwork, betweenness_centrality, jaccard
from qualimeta.report import flat_ranking
from qualimeta.synth import GROUPS, designed_grades, designed_order, write_design_fixture
from conftest import make_dataset, write_csv
from oracles import betweenness_brute, fisher_enumeration, jaccard_brute

CLOCK = "2024-01-01T00:00:00Z"
CFG = RunConfig(field_label="test")


@pytest.mark.acceptance("jaccard exact on 1000 random set pairs")
def test_jaccard_criterion():
    rng = random.Random(20240101)
    for _ in range(1000):
        universe = range(rng.randint(1, 12))
        a = {x for x in universe if rng.random() < 0.5}
        b = {x for x in universe if rng.random() < 0.5}
        assert jaccard(a, b) == jaccard_brute(a, b)
        if a:
            assert jaccard(a, a) == 1.0
        assert jaccard(a, set()) == 0.0


def _connected(nodes, edges):
    adj = {v: set() for v in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, queue = {nodes[0]}, deque([nodes[0]])
    while queue:
        for w in adj[queue.popleft()] - seen:
            seen.add(w)
            queue.append(w)
    return len(seen) == len(nodes)


@pytest.mark.acceptance("betweenness matches path enumeration (>=500 graphs, <10 s)")
def test_betweenness_criterion():
    path = VariableNetwork.from_edges("abc", [("a", "b"), ("b", "c")])
    assert betweenness_centrality(path)["b"] == 1.0
    star = VariableNetwork.from_edges("hwxy", [("h", "w"), ("h", "x"), ("h", "y")])
    assert betweenness_centrality(star)["h"] == 3.0

    rng = random.Random(7)
    graphs = []
    while len(graphs) < 500:
        n = rng.randint(2, 8)
        nodes = [f"v{i}" for i in range(n)]
        p = rng.uniform(0.2, 0.9)
        edges = [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:] if rng.random() < p]
        if _connected(nodes, edges):
            graphs.append((nodes, edges))

    start = time.perf_counter()
    results = [betweenness_centrality(VariableNetwork.from_edges(n, e)) for n, e in graphs]
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    worst = 0.0
    for (nodes, edges), got in zip(graphs, results):
        want = betweenness_brute(nodes, edges)
        worst = max(worst, max(abs(got[v] - float(want[v])) for v in nodes))
    assert worst <= 1e-9
    print(f"betweenness: 500 graphs in {elapsed:.3f}s, max abs error {worst:.2e}")


def _random_table(rng):
    n_rows = rng.randint(5, 60)
    header = ["id", "value", "score", "label"]
    rows = []
    for i in range(n_rows):
        rows.append([
            str(rng.randint(1, 8)),
            f"{rng.gauss(50, 10):.2f}" if rng.random() > 0.1 else "",
            str(rng.randint(0, 100)) if rng.random() > 0.05 else "n/a",
            rng.choice(["a", "b", "c", ""]),
        ])
    if rng.random() < 0.5:
        rows.append([str(rng.randint(1, 8)), f"{rng.uniform(500, 5000):.2f}", "7", "a"])
    return header, rows


@pytest.mark.acceptance("index monotonicity (200 trials each)")
def test_monotonicity_criterion():
    rng = random.Random(99)
    failures = {"completeness": [], "uniqueness": [], "accuracy": []}
    for _ in range(200):
        header, rows = _random_table(rng)
        before = completeness(make_dataset(header, rows)).overall
        i, j = rng.randrange(len(rows)), rng.randrange(len(header))
        blanked = [list(r) for r in rows]
        blanked[i][j] = ""
        after = completeness(make_dataset(header, blanked)).overall
        if after > before:
            failures["completeness"].append((before, after))

    for _ in range(200):
        header, rows = _random_table(rng)
        before = uniqueness(make_dataset(header, rows)).distinct_row_ratio
        dup = rows + [list(rng.choice(rows))]
        after = uniqueness(make_dataset(header, dup)).distinct_row_ratio
        if after > before:
            failures["uniqueness"].append((before, after))

    for _ in range(200):
        header, rows = _random_table(rng)
        ds = make_dataset(header, rows)
        numeric = [c for c in ds.columns if c.is_numeric]
        col = rng.choice(numeric)
        j = header.index(col.raw_name)
        values = [c.parsed.value for c in col.cells if c.tag == "number"]
        span = max(values) - min(values)
        extreme = max(values) + 10 * (span + 1)
        # the new row carries the extreme value and nothing else
        new = [""] * len(header)
        new[j] = str(int(extreme)) if col.inferred_type == "integer" else f"{extreme:.2f}"
        before = accuracy(ds, CFG).anomalous_cells
        after = accuracy(make_dataset(header, rows + [new]), CFG).anomalous_cells
        if after < before:
            failures["accuracy"].append((col.raw_name, sorted(values), new[j], before, after))

    for name, found in failures.items():
        print(f"monotonicity/{name}: {len(found)} of 200 trials violated")
        if found:
            print(f"  first counterexample: {found[0]}")
    assert not any(failures.values())


def _series(period, n=40, start=1_600_000_000):
    return [
        [datetime.fromtimestamp(start + k * period, tz=timezone.utc).strftime("%Y-%m-%d %H:%M:%S")]
        for k in range(n)
    ]


@pytest.mark.acceptance("granularity exact on periodic series and the 0/1/3/7 fixture")
def test_granularity_criterion():
    for period in (60, 3600, 86400):
        ds = make_dataset(["t"], _series(period))
        assert granularity(ds, ["t"])["t"].median_interval == period
    base = datetime(2021, 1, 1)
    rows = [[(base + timedelta(minutes=m)).strftime("%Y-%m-%d %H:%M")] for m in (0, 1, 3, 7)]
    assert granularity(make_dataset(["t"], rows), ["t"])["t"].median_interval == 120


@pytest.mark.acceptance("designed fixture rankings via compare")
def test_design_fixture_criterion(tmp_path):
    configs = write_design_fixture(tmp_path, seed=0)
    grades = designed_grades()
    checked = 0
    for group, cfg in zip(GROUPS, configs):
        assert main(["compare", "--config", str(cfg), "--clock", CLOCK]) == 0
        doc = json.loads((cfg.parent / "out" / f"{json.loads(cfg.read_text())['run_id']}.quality.json").read_text())
        for index in ("completeness", "quantity", "uniqueness", "precision"):
            if not all((ds, index) in grades for ds in group):
                continue  # index not part of this triple's design
            entry = doc["comparison"][index]
            assert all(len(g) == 1 for g in entry["ranking"]), (group, index, entry["ranking"])
            assert flat_ranking(entry) == designed_order(index, group), (group, index)
            checked += 1
        if group == ("A", "B", "C"):
            assert flat_ranking(doc["comparison"]["completeness"]) == ["B", "A", "C"]
    assert checked == 14


def _resp(ds, rating):
    return AssessmentResponse("p", "experienced", "raw_only", ds, "completeness", rating=rating)


@pytest.mark.acceptance("analytics formulas exact")
def test_analytics_criterion():
    assert abs(coefficient_of_variation([2, 4]) - 1 / 3) <= 1e-12
    assert abs(simpsons_diversity([{"a"}, {"b"}, {"c"}, {"d"}]) - 0.75) <= 1e-12
    truth = GroundTruthMatrix(
        {("X", "completeness"): "H", ("Y", "completeness"): "M", ("Z", "completeness"): "L"},
        (("X", "Y", "Z"),),
    )
    assert false_answer_rate([_resp("X", 2), _resp("Y", 2), _resp("Z", 1)], truth) == 2 / 3
    oracle = fisher_enumeration([[5, 0], [0, 5]])["p_two_sided"]
    assert oracle * 252 == 2
    assert abs(fisher_exact_2x2([[5, 0], [0, 5]]).p_two_sided - 2 / 252) <= 1e-12
    assert abs(fisher_exact_2x2([[5, 0], [0, 5]]).p_two_sided - float(oracle)) <= 1e-12


@pytest.mark.acceptance("compare output byte-identical across runs")
def test_determinism_criterion(tmp_path):
    configs = write_design_fixture(tmp_path / "fx", seed=3)
    cfg = configs[1]
    outputs = []
    for k, hashseed in enumerate(("1", "2")):
        out = tmp_path / f"run{k}"
        env = {**os.environ, "PYTHONHASHSEED": hashseed}
        subprocess.run(
            [sys.executable, "-m", "qualimeta", "compare", "--config", str(cfg),
             "--out", str(out), "--seed", "11", "--clock", CLOCK],
            check=True, env=env, capture_output=True,
        )
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert sorted(outputs[0]) == ["triple_DEF.quality.json", "triple_DEF.report.html"]
    assert outputs[0] == outputs[1]


def _wide_table(path, seed):
    rng = random.Random(seed)
    header = ["observed_at", "latitude", "longitude"] + [f"m{k}" for k in range(12)] + [
        "count", "station", "status", "note", "code"]
    start = datetime(2022, 1, 1)
    rows = []
    for i in range(10_000):
        row = [
            (start + timedelta(minutes=10 * i)).strftime("%Y-%m-%d %H:%M"),
            f"{rng.uniform(30, 45):.5f}",
            f"{rng.uniform(130, 145):.5f}",
        ]
        row += [f"{rng.gauss(k * 10, 3):.{k % 4}f}" if rng.random() > 0.02 else "" for k in range(12)]
        row += [str(rng.randint(0, 500)), f"st{rng.randint(1, 40)}", rng.choice(["ok", "warn", "NA"]),
                rng.choice(["", "sunny", "rain", "cloudy"]), f"C{rng.randint(1000, 9999)}"]
        rows.append(row)
    write_csv(path, header, rows)
    return header


@pytest.mark.acceptance("profile 3 x 10k x 20 in under 30 s")
def test_performance_criterion(tmp_path):
    entries = []
    for k in range(3):
        header = _wide_table(tmp_path / f"w{k}.csv", k)
        assert len(header) == 20
        entries.append({"path": f"w{k}.csv", "id": f"W{k}"})
    cfg = tmp_path / "perf.json"
    cfg.write_text(json.dumps({
        "field_label": "meteorology", "datasets": entries,
        "important_variables": ["observed_at", "latitude"],
    }), encoding="utf-8")
    start = time.perf_counter()
    assert main(["profile", "--config", str(cfg), "--out", str(tmp_path / "out"), "--clock", CLOCK]) == 0
    elapsed = time.perf_counter() - start
    print(f"profile: 3 x 10000 x 20 in {elapsed:.2f}s")
    assert elapsed < 30.0
    assert len(list(Path(tmp_path / "out").iterdir())) == 3
