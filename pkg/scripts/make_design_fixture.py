"""Write the 12 designed datasets, one compare config per triple, and the truth JSON."""

import argparse

from qualimeta.synth import write_design_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for path in write_design_fixture(args.out_dir, args.seed):
        print(path)


if __name__ == "__main__":
    main()
