"""Imaginary-axis crossing of the discrete first pair for several half-lengths."""
import argparse
import sys

from thermoscope.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--Ls", default="4,8,16")
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--out", default="results/crossing_sweep")
    args = ap.parse_args()
    sys.exit(main(["sweep", "--grid", "L", "--Ls", args.Ls, "--m", str(args.m), "--out", args.out]))
