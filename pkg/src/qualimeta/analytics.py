"""Scoring of human quality-assessment responses.

Responses are per participant, per dataset and per index.  Quality
indices take a rating on a five-level scale where 1 is "sufficient
quality", 4 is "insufficient quality" and 5 means "cannot be
evaluated".  Variable indices take a free selection of variable names.

Responses CSV header::

    participant_id,experience_category,condition,dataset_id,index,rating,selected_variables

``selected_variables`` is a ``;``-joined list.  Ground truth JSON::

    {"groups": [["A", "B", "C"], ...],
     "grades": {"A": {"accuracy": "H", "completeness": "M"}, ...},
     "fields": {"A": "sightseeing", ...}}
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from qualimeta.indices import QUALITY_INDICES
from qualimeta.netmetrics import VARIABLE_INDICES

CATEGORIES = ("experienced", "semi_experienced", "inexperienced")
CONDITIONS = ("raw_only", "with_metadata")
ALL_INDICES = QUALITY_INDICES + VARIABLE_INDICES
CANNOT_EVALUATE = 5
GRADE_RANK = {"H": 0, "M": 1, "L": 2}

RESPONSE_HEADER = (
    "participant_id",
    "experience_category",
    "condition",
    "dataset_id",
    "index",
    "rating",
    "selected_variables",
)


class ResponseFormatError(ValueError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class AssessmentResponse:
    participant_id: str
    experience_category: str
    condition: str
    dataset_id: str
    index: str
    rating: int | None = None
    selected_variables: frozenset[str] | None = None

    def __post_init__(self) -> None:
        if self.experience_category not in CATEGORIES:
            raise ValueError(f"unknown experience category {self.experience_category!r}")
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition {self.condition!r}")
        if self.index not in ALL_INDICES:
            raise ValueError(f"unknown index {self.index!r}")
        if (self.rating is None) == (self.selected_variables is None):
            raise ValueError("exactly one of rating / selected_variables must be given")
        if self.rating is not None:
            if self.index not in QUALITY_INDICES:
                raise ValueError(f"{self.index} is a variable index; it takes selected_variables")
            if isinstance(self.rating, bool) or self.rating not in (1, 2, 3, 4, 5):
                raise ValueError(f"rating must be an integer 1-5, got {self.rating!r}")
        elif self.index not in VARIABLE_INDICES:
            raise ValueError(f"{self.index} is a quality index; it takes a rating")

    @property
    def is_rating(self) -> bool:
        return self.rating is not None


@dataclass(frozen=True)
class GroundTruthMatrix:
    grades: dict[tuple[str, str], str]
    groups: tuple[tuple[str, ...], ...]
    fields: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for (ds, index), grade in self.grades.items():
            if grade not in GRADE_RANK:
                raise ValueError(f"grade for ({ds}, {index}) must be H/M/L, got {grade!r}")
        for group in self.groups:
            indices = {i for (d, i) in self.grades if d in group}
            for index in indices:
                got = [self.grades.get((d, index)) for d in group]
                if None in got or len(set(got)) != len(got):
                    raise ValueError(
                        f"group {list(group)}: {index} grades {got} are not all distinct"
                    )

    def grade(self, dataset_id: str, index: str) -> str | None:
        return self.grades.get((dataset_id, index))


def _check_filter(category: str | None, condition: str | None, index: str | None) -> None:
    if category is not None and category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    if condition is not None and condition not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}")
    if index is not None and index not in ALL_INDICES:
        raise ValueError(f"unknown index {index!r}")


def select(
    responses: Iterable[AssessmentResponse],
    *,
    category: str | None = None,
    condition: str | None = None,
    index: str | None = None,
) -> list[AssessmentResponse]:
    _check_filter(category, condition, index)
    return [
        r for r in responses
        if (category is None or r.experience_category == category)
        and (condition is None or r.condition == condition)
        and (index is None or r.index == index)
    ]


def cannot_evaluate_ratio(responses, *, category=None, condition=None, index=None) -> float:
    rated = [
        r for r in select(responses, category=category, condition=condition, index=index)
        if r.is_rating
    ]
    if not rated:
        raise ValueError("filter selects no rating records")
    return sum(1 for r in rated if r.rating == CANNOT_EVALUATE) / len(rated)


def coefficient_of_variation(ratings: Sequence[float]) -> float:
    """Population standard deviation divided by the mean.

    "Cannot evaluate" answers must be dropped by the caller.
    """
    if len(ratings) < 2:
        raise ValueError("coefficient of variation needs at least 2 ratings")
    mean = statistics.fmean(ratings)
    if mean == 0:
        raise ValueError("coefficient of variation is undefined for zero mean")
    return statistics.pstdev(ratings, mu=mean) / mean


def _rating_table(rated: Iterable[AssessmentResponse]) -> dict[tuple[str, str, str], dict[str, int]]:
    table: dict[tuple[str, str, str], dict[str, int]] = defaultdict(dict)
    for r in rated:
        key = (r.participant_id, r.condition, r.index)
        if r.dataset_id in table[key]:
            raise ValueError(
                f"participant {r.participant_id} rated {r.dataset_id}/{r.index} "
                f"twice under {r.condition}"
            )
        table[key][r.dataset_id] = r.rating
    return table


def false_answer_counts(
    responses, truth: GroundTruthMatrix, *, category=None, condition=None, index=None
) -> dict[str, tuple[int, int]]:
    """Per participant: (false pairs, comparable pairs).

    Within each comparison group, every pair of datasets with different
    designed grades is oriented better-vs-worse.  The pair is comparable
    when both ratings are 1-4, and false when the better dataset got the
    strictly larger (worse) rating.
    """
    rated = [
        r for r in select(responses, category=category, condition=condition, index=index)
        if r.is_rating
    ]
    counts: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for (participant, _, idx), ratings in sorted(_rating_table(rated).items()):
        for group in truth.groups:
            for x, y in combinations(group, 2):
                gx, gy = truth.grade(x, idx), truth.grade(y, idx)
                if gx is None or gy is None or gx == gy:
                    continue
                if GRADE_RANK[gx] > GRADE_RANK[gy]:
                    x, y = y, x
                rx, ry = ratings.get(x), ratings.get(y)
                if rx is None or ry is None or CANNOT_EVALUATE in (rx, ry):
                    continue
                counts[participant][1] += 1
                if rx > ry:
                    counts[participant][0] += 1
    return {p: (f, n) for p, (f, n) in counts.items() if n}


def false_answer_rate(
    responses,
    truth: GroundTruthMatrix,
    *,
    category=None,
    condition=None,
    index=None,
    aggregate: str = "pooled",
) -> float:
    """Share of comparable pairs ordered against the designed grades.

    ``aggregate="pooled"`` divides all false pairs by all comparable
    pairs; ``"participant_mean"`` averages each participant's own rate.
    """
    counts = false_answer_counts(
        responses, truth, category=category, condition=condition, index=index
    )
    if not counts:
        raise ValueError("no comparable pairs")
    if aggregate == "pooled":
        return sum(f for f, _ in counts.values()) / sum(n for _, n in counts.values())
    if aggregate == "participant_mean":
        return statistics.fmean(f / n for f, n in counts.values())
    raise ValueError(f"unknown aggregate {aggregate!r}")


def simpsons_diversity(selections: Iterable[Iterable[str]]) -> float:
    """1 - sum(p_i^2) over all pooled selected-variable instances."""
    counts = Counter(v for sel in selections for v in sel)
    total = sum(counts.values())
    if total == 0:
        raise ValueError("no selected variables")
    return float(1 - Fraction(sum(c * c for c in counts.values()), total * total))


@dataclass(frozen=True)
class FisherResult:
    p_two_sided: float
    p_less: float
    p_greater: float
    point_probability: float


def hypergeometric_table_probabilities(table) -> dict[int, Fraction]:
    """Exact probability of each top-left count given the table's margins."""
    (a, b), (c, d) = table
    r1, r2, c1 = a + b, c + d, a + c
    n = r1 + r2
    denom = math.comb(n, c1)
    lo, hi = max(0, c1 - r2), min(r1, c1)
    return {
        k: Fraction(math.comb(r1, k) * math.comb(r2, c1 - k), denom)
        for k in range(lo, hi + 1)
    }


def fisher_exact_2x2(table) -> FisherResult:
    """Fisher's exact test on [[a, b], [c, d]].

    Two-sided p sums the probabilities of all tables with the observed
    margins that are no more likely than the observed one.  ``p_less``
    is P(X <= a), ``p_greater`` is P(X >= a).  Arithmetic is exact.
    """
    cells = [table[0][0], table[0][1], table[1][0], table[1][1]]
    if any(isinstance(x, bool) or int(x) != x for x in cells):
        raise ValueError("table entries must be integers")
    if any(x < 0 for x in cells):
        raise ValueError("table entries must be non-negative")
    if sum(cells) == 0:
        raise ValueError("table total must be positive")
    a = int(cells[0])
    probs = hypergeometric_table_probabilities([[int(x) for x in table[0]], [int(x) for x in table[1]]])
    p_obs = probs[a]
    two = sum(p for p in probs.values() if p <= p_obs)
    less = sum(p for k, p in probs.items() if k <= a)
    greater = sum(p for k, p in probs.items() if k >= a)
    return FisherResult(float(min(two, 1)), float(less), float(greater), float(p_obs))


# --- file formats ---------------------------------------------------------

def parse_response_row(row: dict[str, str], line: int) -> AssessmentResponse:
    rating_text = (row.get("rating") or "").strip()
    selected_text = (row.get("selected_variables") or "").strip()
    rating = None
    if rating_text:
        try:
            rating = int(rating_text)
        except ValueError:
            raise ResponseFormatError(line, f"rating {rating_text!r} is not an integer") from None
        if rating not in (1, 2, 3, 4, 5):
            raise ResponseFormatError(line, f"rating {rating} is outside 1-5")
    selected = None
    if selected_text:
        selected = frozenset(s.strip() for s in selected_text.split(";") if s.strip())
    try:
        return AssessmentResponse(
            participant_id=row["participant_id"].strip(),
            experience_category=row["experience_category"].strip(),
            condition=row["condition"].strip(),
            dataset_id=row["dataset_id"].strip(),
            index=row["index"].strip(),
            rating=rating,
            selected_variables=selected,
        )
    except ValueError as exc:
        raise ResponseFormatError(line, str(exc)) from None


def load_responses(path: str | Path) -> list[AssessmentResponse]:
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ResponseFormatError(1, "file is empty")
        if tuple(h.strip() for h in reader.fieldnames) != RESPONSE_HEADER:
            raise ResponseFormatError(1, f"header must be {','.join(RESPONSE_HEADER)}")
        out = []
        for row in reader:
            if None in row or any(v is None for v in row.values()):
                raise ResponseFormatError(reader.line_num, "wrong number of fields")
            out.append(parse_response_row(row, reader.line_num))
    if not out:
        raise ResponseFormatError(1, "no response records")
    return out


def truth_from_dict(data: dict) -> GroundTruthMatrix:
    if not isinstance(data, dict) or "grades" not in data or "groups" not in data:
        raise ValueError("ground truth needs 'grades' and 'groups'")
    grades = {}
    for ds, by_index in data["grades"].items():
        for index, grade in by_index.items():
            if index not in ALL_INDICES:
                raise ValueError(f"unknown index {index!r} for dataset {ds}")
            grades[(ds, index)] = grade
    groups = tuple(tuple(g) for g in data["groups"])
    return GroundTruthMatrix(grades, groups, dict(data.get("fields", {})))


def load_truth(path: str | Path) -> GroundTruthMatrix:
    return truth_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def truth_to_dict(truth: GroundTruthMatrix) -> dict:
    grades: dict[str, dict[str, str]] = {}
    for (ds, index), grade in sorted(truth.grades.items()):
        grades.setdefault(ds, {})[index] = grade
    return {"groups": [list(g) for g in truth.groups], "grades": grades, "fields": dict(truth.fields)}


# --- aggregate report -----------------------------------------------------

def _or_none(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValueError:
        return None


def _cv_by_dataset(cell: list[AssessmentResponse]) -> dict[str, float]:
    by_ds: dict[str, list[int]] = defaultdict(list)
    for r in cell:
        if r.is_rating and r.rating != CANNOT_EVALUATE:
            by_ds[r.dataset_id].append(r.rating)
    out = {}
    for ds in sorted(by_ds):
        cv = _or_none(coefficient_of_variation, by_ds[ds])
        if cv is not None:
            out[ds] = cv
    return out


def analyze(responses: Sequence[AssessmentResponse], truth: GroundTruthMatrix) -> dict:
    """One record per (index, category, condition) plus raw-vs-metadata tests."""
    records = []
    tests = []
    categories = [c for c in CATEGORIES if any(r.experience_category == c for r in responses)]
    indices = [i for i in ALL_INDICES if any(r.index == i for r in responses)]
    for index in indices:
        for category in categories:
            per_condition = {}
            for condition in CONDITIONS:
                cell = select(responses, category=category, condition=condition, index=index)
                if not cell:
                    continue
                rec = {"index": index, "category": category, "condition": condition,
                       "n_records": len(cell)}
                if index in QUALITY_INDICES:
                    rated = [r for r in cell if r.is_rating]
                    cannot = sum(1 for r in rated if r.rating == CANNOT_EVALUATE)
                    counts = false_answer_counts(cell, truth)
                    false_pairs = sum(f for f, _ in counts.values())
                    comparable = sum(n for _, n in counts.values())
                    cv_ds = _cv_by_dataset(cell)
                    rec.update({
                        "cannot_evaluate_count": cannot,
                        "cannot_evaluate_ratio": cannot / len(rated),
                        "cv": statistics.fmean(cv_ds.values()) if cv_ds else None,
                        "cv_by_dataset": cv_ds,
                        "false_pairs": false_pairs,
                        "comparable_pairs": comparable,
                        "false_answer_rate": false_pairs / comparable if comparable else None,
                        "false_answer_rate_participant_mean": (
                            statistics.fmean(f / n for f, n in counts.values()) if counts else None
                        ),
                    })
                    per_condition[condition] = (cannot, len(rated) - cannot, false_pairs, comparable - false_pairs)
                else:
                    selections = [r.selected_variables for r in cell]
                    by_field: dict[str, list] = defaultdict(list)
                    for r in cell:
                        if r.dataset_id in truth.fields:
                            by_field[truth.fields[r.dataset_id]].append(r.selected_variables)
                    rec.update({
                        "simpson": _or_none(simpsons_diversity, selections),
                        "simpson_by_field": {
                            f: simpsons_diversity(s) for f, s in sorted(by_field.items())
                        },
                    })
                records.append(rec)
            if set(per_condition) == set(CONDITIONS):
                raw, meta = per_condition["raw_only"], per_condition["with_metadata"]
                test = {"index": index, "category": category}
                if raw[0] + raw[1] + meta[0] + meta[1]:
                    test["cannot_evaluate"] = _fisher_dict([[raw[0], raw[1]], [meta[0], meta[1]]])
                if raw[2] + raw[3] + meta[2] + meta[3]:
                    test["false_answers"] = _fisher_dict([[raw[2], raw[3]], [meta[2], meta[3]]])
                tests.append(test)
    return {"schema_version": 1, "records": records, "tests": tests}


def _fisher_dict(table) -> dict:
    res = fisher_exact_2x2(table)
    return {
        "table": table,
        "p_two_sided": res.p_two_sided,
        "p_less": res.p_less,
        "p_greater": res.p_greater,
    }
