"""Write every figure data set (including the slow Hopf scan) into one directory."""
import argparse
import sys

from thermoscope.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/figures")
    ap.add_argument("--m", type=int, default=8, help="grid level for the eigenfunction sweeps")
    args = ap.parse_args()
    sys.exit(main(["figures", "--all", "--m", str(args.m), "--out", args.out]))
