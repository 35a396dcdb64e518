"""Run compare on every designed triple and check rankings against the design.

Prints one line per (triple, index) with the observed ranking, the
designed best-to-worst order, and whether they agree.  Exits 1 if any
designed index disagrees.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from qualimeta.cli import main as cli_main
from qualimeta.report import flat_ranking
from qualimeta.synth import GROUPS, DESIGN, designed_grades, designed_order, write_design_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--work-dir", help="keep fixture and outputs here (default: temp dir)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--clock", default="2024-01-01T00:00:00Z")
    args = ap.parse_args()

    work = Path(args.work_dir or tempfile.mkdtemp(prefix="design_"))
    configs = write_design_fixture(work, args.seed)
    grades = designed_grades()
    mismatches = 0
    for group, cfg in zip(GROUPS, configs):
        if cli_main(["compare", "--config", str(cfg), "--clock", args.clock]) != 0:
            return 1
        run_id = json.loads(cfg.read_text())["run_id"]
        doc = json.loads((work / "out" / f"{run_id}.quality.json").read_text())
        for index in DESIGN:
            if not all((ds, index) in grades for ds in group):
                continue
            got = flat_ranking(doc["comparison"][index])
            want = designed_order(index, group)
            ok = got == want
            mismatches += not ok
            print(f"{''.join(group)}  {index:<13} got {''.join(got):<4} want {''.join(want):<4} "
                  f"{'ok' if ok else 'MISMATCH'}")
    print(f"outputs in {work / 'out'}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
