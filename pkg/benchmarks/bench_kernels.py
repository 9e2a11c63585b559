"""Compiled versus pure-Python kernels on the hot loops.

Run: python benchmarks/bench_kernels.py [--repeat N]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from irc_game import _kernels_py, canonical, kernels
from irc_game.af_analytic import br_coefficients

try:
    from irc_game import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def workloads(impl):
    sc = canonical.nu_sweep_scenario()
    codes, packed = kernels.pack_scenario(sc)
    grid = np.linspace(0.0, sc.p1, 101)
    fig4 = canonical.three_equilibria_scenario()
    c = br_coefficients(fig4)
    axis = np.linspace(0.0, 1.0, 101)
    s1, s2 = np.meshgrid(axis, axis, indexing="ij")
    lo, hi = np.array([0.3, 0.3]), np.array([0.7, 0.7])
    other = np.array([0.5 * sc.p2, 0.5 * sc.p2])
    return {
        "rate_table (DF, 101 points)":
            lambda: impl.rate_table(int(codes[0]), packed[0], 0, grid, 0.5 * sc.p2),
        "refine_br (2 bands)":
            lambda: impl.refine_br(codes, packed, 0, sc.p1, other, lo, hi, 1e-12),
        "affine_cournot_grid (101 x 101)":
            lambda: impl.affine_cournot_grid(c.c, c.d, s1, s2, 1000, 1e-12),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _kernels_py)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled extension not built; timing the fallback only")
    results = {}
    for name, impl in backends:
        for label, fn in workloads(impl).items():
            number = 3 if name == "python" else 30
            t = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            results[(label, name)] = t
    labels = list(workloads(_kernels_py))
    print(f"{'workload':36s} {'python':>12s} {'cython':>12s} {'speedup':>9s}")
    for label in labels:
        tp = results[(label, "python")]
        tc = results.get((label, "cython"))
        if tc is None:
            print(f"{label:36s} {tp * 1e3:10.3f}ms {'-':>12s} {'-':>9s}")
        else:
            print(f"{label:36s} {tp * 1e3:10.3f}ms {tc * 1e3:10.3f}ms {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
