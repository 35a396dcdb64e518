"""Synthetic datasets with designed quality levels.

Twelve datasets in four comparison triples: two sightseeing triples
(A-C, G-I) and two meteorology triples (D-F, J-L).  Within each triple
every designed index takes each of the grades H, M and L once.  The
generator controls each index through one mechanism:

=============  ==========================================================
quantity       number of rows
completeness   share of blanked cells
uniqueness     share of appended exact-duplicate rows
precision      decimal places written for continuous values
accuracy       injected out-of-range / malformed values
compliance     share of timestamps written in an alternate format
granularity    spacing of the observation timestamps
=============  ==========================================================

Meteorology anomalies are range outliers only, so accuracy corruption
never leaks into the compliance ratios.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

from qualimeta.analytics import (
    CATEGORIES,
    CONDITIONS,
    AssessmentResponse,
    GroundTruthMatrix,
    truth_to_dict,
)

GROUPS = (("A", "B", "C"), ("D", "E", "F"), ("G", "H", "I"), ("J", "K", "L"))
FIELDS = {ds: ("sightseeing" if i % 2 == 0 else "meteorology") for i, g in enumerate(GROUPS) for ds in g}

# index -> grades for A..L ("." = not part of the design)
DESIGN = {
    "accuracy":     "HLM" "HLM" "HLM" "HLM",
    "completeness": "MHL" "MHL" "LHM" "MHL",
    "compliance":   "..." "HML" "..." "HML",
    "precision":    "LMH" "LMH" "MLH" "LMH",
    "granularity":  "..." "HML" "..." "HML",
    "quantity":     "HML" "HML" "LHM" "HML",
    "uniqueness":   "..." "LMH" "..." "LMH",
}
DATASET_IDS = tuple(ds for g in GROUPS for ds in g)


def designed_grades() -> dict[tuple[str, str], str]:
    out = {}
    for index, row in DESIGN.items():
        for ds, grade in zip(DATASET_IDS, row):
            if grade != ".":
                out[(ds, index)] = grade
    return out


def designed_truth() -> GroundTruthMatrix:
    return GroundTruthMatrix(designed_grades(), GROUPS, dict(FIELDS))


def designed_order(index: str, group: tuple[str, ...]) -> list[str]:
    """Dataset ids of a triple ordered best (H) to worst (L)."""
    grades = designed_grades()
    return sorted(group, key=lambda ds: "HML".index(grades[(ds, index)]))


@dataclass(frozen=True)
class Levels:
    rows: dict[str, int]
    missing: dict[str, float]
    distinct: dict[str, float]
    decimals: dict[str, int]
    anomalies: dict[str, float]
    alt_format: dict[str, float]
    period_s: dict[str, int]


SIGHTSEEING = Levels(
    rows={"H": 240, "M": 120, "L": 48},
    missing={"H": 0.0, "M": 0.06, "L": 0.18},
    distinct={"H": 1.0, "M": 1.0, "L": 1.0},
    decimals={"H": 7, "M": 5, "L": 3},
    anomalies={"H": 0.0, "M": 0.02, "L": 0.06},
    alt_format={"H": 0.0, "M": 0.0, "L": 0.0},
    period_s={"H": 0, "M": 0, "L": 0},
)

METEOROLOGY = Levels(
    rows={"H": 480, "M": 240, "L": 96},
    missing={"H": 0.0, "M": 0.06, "L": 0.18},
    distinct={"H": 1.0, "M": 0.85, "L": 0.7},
    decimals={"H": 2, "M": 1, "L": 0},
    anomalies={"H": 0.0, "M": 0.02, "L": 0.06},
    alt_format={"H": 0.0, "M": 0.1, "L": 0.3},
    period_s={"H": 3600, "M": 3 * 3600, "L": 86400},
)

SIGHTSEEING_COLUMNS = [
    "name", "address", "latitude", "longitude", "url", "phone",
    "opening_hours", "closed_days", "barrier_free",
]
METEOROLOGY_COLUMNS = [
    "observed_at", "temperature", "precipitation", "cloud_cover", "local_air_pressure",
    "weather", "sunshine_hours", "solar_radiation", "relative_humidity",
]

PRIMARY_FORMAT = "%Y-%m-%d %H:%M"
ALT_FORMAT = "%Y/%m/%d %H:%M"
START = datetime(2023, 4, 1)


def _grade(ds: str, index: str, default: str = "H") -> str:
    return designed_grades().get((ds, index), default)


def _sightseeing_rows(ds: str, rng: random.Random) -> list[list[str]]:
    lv = SIGHTSEEING
    n = lv.rows[_grade(ds, "quantity")]
    dec = lv.decimals[_grade(ds, "precision")]
    rows = []
    for i in range(n):
        rows.append([
            f"Spot {ds}{i:04d}",
            f"{rng.randint(1, 9)}-{rng.randint(1, 30)}-{i + 1} Chuo, Sapporo",
            f"{rng.uniform(42.9, 43.2):.{dec}f}",
            f"{rng.uniform(141.2, 141.5):.{dec}f}",
            f"https://example.org/{ds.lower()}/spots/{i + 1}",
            f"011-{rng.randint(200, 899)}-{rng.randint(1000, 9999)}",
            rng.choice(["09:00-17:00", "10:00-18:00", "08:30-16:30", "24 hours"]),
            rng.choice(["Mon", "Tue", "Wed", "none", "Sat;Sun"]),
            rng.choice(["yes", "no"]),
        ])
    k = _count(n, lv.anomalies[_grade(ds, "accuracy")])
    for j, i in enumerate(rng.sample(range(n), k)):
        kind = j % 3
        if kind == 0:
            rows[i][4] = f"htp//example.org/{i}"
        elif kind == 1:
            rows[i][5] = "call us"
        else:
            rows[i][2] = f"{rng.uniform(120, 140):.{dec}f}"
    return rows


def _fmt(x: float, dec: int) -> str:
    text = f"{x:.{dec}f}"
    return "0" if dec == 0 and text == "-0" else text


def _meteorology_rows(ds: str, rng: random.Random) -> list[list[str]]:
    lv = METEOROLOGY
    n_total = lv.rows[_grade(ds, "quantity")]
    n = round(n_total * lv.distinct[_grade(ds, "uniqueness")])
    dec = lv.decimals[_grade(ds, "precision")]
    period = timedelta(seconds=lv.period_s[_grade(ds, "granularity")])
    alt = set(rng.sample(range(n), _count(n, lv.alt_format[_grade(ds, "compliance")], floor=False)))
    rows = []
    for i in range(n):
        t = START + i * period
        rows.append([
            t.strftime(ALT_FORMAT if i in alt else PRIMARY_FORMAT),
            _fmt(rng.uniform(-5, 30), dec),
            _fmt(rng.uniform(0, 30), dec),
            str(rng.randint(0, 10)),
            _fmt(rng.uniform(990, 1030), dec),
            rng.choice(["sunny", "cloudy", "rain", "snow"]),
            _fmt(rng.uniform(0, 1), dec),
            _fmt(rng.uniform(0, 3), dec),
            str(rng.randint(30, 95)),
        ])
    k = _count(n, lv.anomalies[_grade(ds, "accuracy")])
    outliers = {1: 85.0, 2: 250.0, 4: 1500.0}
    for j, i in enumerate(rng.sample(range(n), k)):
        col = (1, 2, 4)[j % 3]
        rows[i][col] = _fmt(outliers[col] + rng.uniform(0, 5), dec)
    return rows


def _count(n: int, rate: float, floor: bool = True) -> int:
    if rate <= 0:
        return 0
    return max(1, round(n * rate)) if floor else round(n * rate)


def _blank(rows: list[list[str]], rate: float, protected: set[int], rng: random.Random) -> None:
    if rate <= 0:
        return
    cells = [(i, j) for i in range(len(rows)) for j in range(len(rows[0])) if j not in protected]
    for i, j in rng.sample(cells, round(len(cells) * rate)):
        rows[i][j] = rng.choice(["", "", "", "N/A"])


def generate_dataset(ds: str, seed: int = 0) -> tuple[list[str], list[list[str]]]:
    """Header and rows for one designed dataset (A..L)."""
    if ds not in FIELDS:
        raise KeyError(f"unknown fixture dataset {ds!r}")
    rng = random.Random(f"{seed}:{ds}")
    if FIELDS[ds] == "sightseeing":
        header, rows, lv = SIGHTSEEING_COLUMNS, _sightseeing_rows(ds, rng), SIGHTSEEING
    else:
        header, rows, lv = METEOROLOGY_COLUMNS, _meteorology_rows(ds, rng), METEOROLOGY
    _blank(rows, lv.missing[_grade(ds, "completeness")], {0}, rng)
    n_total = lv.rows[_grade(ds, "quantity")]
    copies = [list(rng.choice(rows)) for _ in range(n_total - len(rows))]
    rows = rows + copies
    rng.shuffle(rows)
    return list(header), rows


def write_design_fixture(out_dir: str | Path, seed: int = 0) -> list[Path]:
    """Write the 12 CSVs, one compare config per triple, and the truth JSON.

    Returns the four config paths, in triple order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for ds in DATASET_IDS:
        header, rows = generate_dataset(ds, seed)
        with open(out / f"{ds}.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    configs = []
    for group in GROUPS:
        field = FIELDS[group[0]]
        important = ["observed_at"] if field == "meteorology" else ["latitude"]
        cfg = {
            "run_id": "triple_" + "".join(group),
            "field_label": field,
            "datasets": [{"path": f"{ds}.csv", "id": ds} for ds in group],
            "important_variables": important,
            "output_dir": "out",
            "seed": seed,
        }
        path = out / f"triple_{''.join(group)}.json"
        path.write_text(json.dumps(cfg, indent=2) + "\n", encoding="utf-8")
        configs.append(path)
    (out / "designed_truth.json").write_text(
        json.dumps(truth_to_dict(designed_truth()), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return configs


# --- simulated respondents -------------------------------------------------

VARIABLE_CHOICES = {
    "sightseeing": ["name", "latitude", "longitude", "address", "url", "phone",
                    "opening_hours", "closed_days", "barrier_free"],
    "meteorology": ["temperature", "precipitation", "cloud_cover", "local_air_pressure",
                    "weather", "sunshine_hours", "solar_radiation", "relative_humidity"],
}


def simulate_responses(
    truth: GroundTruthMatrix,
    participants_per_category: dict[str, int] | None = None,
    seed: int = 0,
) -> list[AssessmentResponse]:
    """Synthetic respondents for exercising the analytics pipeline.

    Each respondent perceives the designed grade plus noise and sometimes
    answers "cannot be evaluated"; metadata lowers both the noise and the
    abstention rate.  This is a toy model, not a model of real people.
    """
    per_cat = participants_per_category or {"experienced": 12, "semi_experienced": 15, "inexperienced": 14}
    noise = {"experienced": 0.6, "semi_experienced": 0.9, "inexperienced": 1.2}
    abstain = {"raw_only": 0.25, "with_metadata": 0.08}
    rng = random.Random(seed)
    quality = sorted({i for (_, i) in truth.grades})
    out = []
    pid = 0
    for cat in CATEGORIES:
        for _ in range(per_cat.get(cat, 0)):
            pid += 1
            for cond in CONDITIONS:
                shrink = 0.5 if cond == "with_metadata" else 1.0
                for group in truth.groups:
                    for ds in group:
                        for index in quality:
                            grade = truth.grade(ds, index)
                            if grade is None:
                                continue
                            if rng.random() < abstain[cond]:
                                rating = 5
                            else:
                                base = {"H": 1.5, "M": 2.5, "L": 3.5}[grade]
                                rating = min(4, max(1, round(base + rng.gauss(0, noise[cat] * shrink))))
                            out.append(AssessmentResponse(f"p{pid:02d}", cat, cond, ds, index, rating=rating))
                        field = truth.fields.get(ds, "meteorology")
                        pool = VARIABLE_CHOICES.get(field, VARIABLE_CHOICES["meteorology"])
                        for index in ("rarity", "universality", "linkage"):
                            k = rng.randint(1, 3)
                            spread = len(pool) if cond == "raw_only" else 4
                            chosen = frozenset(rng.sample(pool[:spread], min(k, spread)))
                            out.append(AssessmentResponse(
                                f"p{pid:02d}", cat, cond, ds, index, selected_variables=chosen
                            ))
    return out


def write_responses(responses, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["participant_id", "experience_category", "condition", "dataset_id",
                         "index", "rating", "selected_variables"])
        for r in responses:
            writer.writerow([
                r.participant_id, r.experience_category, r.condition, r.dataset_id, r.index,
                "" if r.rating is None else r.rating,
                "" if r.selected_variables is None else ";".join(sorted(r.selected_variables)),
            ])
