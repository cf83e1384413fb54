"""Amplitude of the limit cycle against gain near the imaginary-axis crossing.

Prints the steady amplitude per gain and the linear fit of amplitude^2, for
two time steps to show the O(dt) drift of the fitted onset.
"""
import argparse

import numpy as np

from thermoscope.kernels import ProblemParams
from thermoscope.pde_sim import hopf_scan
from thermoscope.popov import critical_params_interval


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=float, default=4.0)
    ap.add_argument("--x0", type=float, default=1.0)
    ap.add_argument("--T", type=float, default=400.0)
    ap.add_argument("--dts", default="1e-3,5e-4")
    args = ap.parse_args()
    p = ProblemParams(args.L, args.x0)
    bc = critical_params_interval(p).beta1
    betas = [bc - 3.0, bc - 2.0, bc - 1.0] + list(bc + np.linspace(0.5, 5.0, 10))
    print(f"beta_c = {bc:.10f}")
    for dt in (float(v) for v in args.dts.split(",")):
        scan = hopf_scan(p, betas, args.T, dt, beta_ref=bc, fit_window=(bc + 0.5, bc + 5.0))
        print(f"\ndt = {dt:g}")
        for b, a, c in zip(scan.betas, scan.amplitudes, scan.classifications):
            print(f"  beta - beta_c = {b - bc:+.3f}  amplitude = {a if a is not None else float('nan'):.6g}  {c}")
        print(f"  fit: beta = {scan.beta_fit:.6f}  slope = {scan.slope:.4g}  R^2 = {scan.r2:.6f}")


if __name__ == "__main__":
    main()
