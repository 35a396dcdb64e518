"""Simulate assessment responses against the designed truth and score them.

The respondent model is a toy; use it to exercise the analytics
pipeline, not to reason about real assessors.
"""

import argparse
import json
from pathlib import Path

from qualimeta.analytics import analyze, truth_to_dict
from qualimeta.report import canonical_json
from qualimeta.synth import simulate_responses, designed_truth, write_responses


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    truth = designed_truth()
    responses = simulate_responses(truth, seed=args.seed)
    write_responses(responses, out / "responses.csv")
    (out / "truth.json").write_text(json.dumps(truth_to_dict(truth), indent=2) + "\n", encoding="utf-8")
    result = analyze(responses, truth)
    (out / "analytics.json").write_text(canonical_json(result), encoding="utf-8")

    print(f"{'index':<13} {'category':<17} {'condition':<14} cannot  false   cv")
    for rec in result["records"]:
        if "false_answer_rate" not in rec:
            continue
        fmt = lambda v: "  -   " if v is None else f"{v:6.3f}"
        print(f"{rec['index']:<13} {rec['category']:<17} {rec['condition']:<14} "
              f"{fmt(rec['cannot_evaluate_ratio'])} {fmt(rec['false_answer_rate'])} {fmt(rec['cv'])}")


if __name__ == "__main__":
    main()
