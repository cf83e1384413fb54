"""Critical frequency, gain, slope and their product across the sensor position delta."""
import argparse
import sys

from thermoscope.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deltas", default="0.05:1.0:0.05")
    ap.add_argument("--out", default="results/delta_sweep")
    args = ap.parse_args()
    sys.exit(main(["sweep", "--grid", "delta", "--deltas", args.deltas, "--out", args.out]))
