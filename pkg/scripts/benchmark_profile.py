"""Time profiling of wide synthetic tables (default 3 x 10,000 rows x 20 columns)."""

import argparse
import csv
import random
import tempfile
import time
from datetime import datetime, timedelta
from pathlib import Path

from qualimeta.config import RunConfig
from qualimeta.indices import profile_dataset
from qualimeta.ingest import load_dataset


def write_table(path, rows, seed):
    rng = random.Random(seed)
    header = ["observed_at", "latitude", "longitude"] + [f"m{k}" for k in range(12)] + [
        "count", "station", "status", "note", "code"]
    start = datetime(2022, 1, 1)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(rows):
            w.writerow(
                [(start + timedelta(minutes=10 * i)).strftime("%Y-%m-%d %H:%M"),
                 f"{rng.uniform(30, 45):.5f}", f"{rng.uniform(130, 145):.5f}"]
                + [f"{rng.gauss(k * 10, 3):.{k % 4}f}" if rng.random() > 0.02 else "" for k in range(12)]
                + [rng.randint(0, 500), f"st{rng.randint(1, 40)}", rng.choice(["ok", "warn", "NA"]),
                   rng.choice(["", "sunny", "rain"]), f"C{rng.randint(1000, 9999)}"]
            )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--datasets", type=int, default=3)
    ap.add_argument("--rows", type=int, default=10_000)
    args = ap.parse_args()

    cfg = RunConfig(field_label="meteorology", important_variables=("observed_at", "latitude"))
    with tempfile.TemporaryDirectory() as tmp:
        paths = [Path(tmp) / f"w{k}.csv" for k in range(args.datasets)]
        for k, p in enumerate(paths):
            write_table(p, args.rows, k)
        total = 0.0
        for p in paths:
            t0 = time.perf_counter()
            ds = load_dataset(p, cfg)
            t1 = time.perf_counter()
            profile_dataset(ds, cfg)
            t2 = time.perf_counter()
            total += t2 - t0
            print(f"{p.name}: load {t1 - t0:.2f}s  profile {t2 - t1:.2f}s")
    print(f"total {total:.2f}s")


if __name__ == "__main__":
    main()
