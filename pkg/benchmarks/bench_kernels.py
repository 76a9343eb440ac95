"""Time the compiled and numpy kernel backends on typical workloads.

    python benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best of ``repeat`` runs and the largest relative
difference between the backends' outputs.
"""

import argparse
import math
import timeit

import numpy as np

from mkdvlab.illposed import ill_grid, make_ill_datum
from mkdvlab.kernels import backends


def workloads():
    rng = np.random.default_rng(0)
    out = {}

    phi = rng.uniform(-1e3, 1e3, 1 << 20)
    phi[::97] = 0.0
    out["phase_kernel (1M points)"] = lambda k: k.phase_kernel(phi, 0.1)

    for N in (64, 256):
        d = make_ill_datum(N, 0.0, ill_grid(N))
        g = d.grid
        live = np.nonzero(d.field.coeffs)[0]
        j, a = g.index[live], np.array(d.field.coeffs[live])
        out[f"triple_interaction (N = {N}, {live.size} modes)"] = (
            lambda k, j=j, a=a, g=g: k.triple_interaction(j, a, g.dxi, 0.1, g.n))

    c = rng.standard_normal(1 << 20) + 1j * rng.standard_normal(1 << 20)
    box = rng.integers(0, 4096, 1 << 20)
    out["box_energies (1M coeffs, 4096 boxes)"] = lambda k: k.box_energies(c, box, 4096)

    x1, x2 = rng.uniform(8, 9, 2000), rng.uniform(-0.5, 0.5, 2000)
    w1, w2 = rng.uniform(0, 1, 2000), rng.uniform(0, 1, 2000)
    out["bilinear_weighted_sum (2000 x 2000)"] = (
        lambda k: k.bilinear_weighted_sum(x1, w1, x2, w2))
    return out


def _diff(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = np.max(np.abs(a))
    return float(np.max(np.abs(a - b)) / scale) if scale else 0.0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    impls = backends()
    names = sorted(impls)
    print(f"backends: {', '.join(names)}")
    head = f"{'workload':44s}" + "".join(f"{n + ' [ms]':>14s}" for n in names)
    if len(names) > 1:
        head += f"{'speedup':>10s}{'max rel diff':>14s}"
    print(head)
    for label, fn in workloads().items():
        best, results = {}, {}
        for n in names:
            results[n] = fn(impls[n])
            best[n] = min(timeit.repeat(lambda: fn(impls[n]), number=1, repeat=args.repeat))
        row = f"{label:44s}" + "".join(f"{1e3 * best[n]:14.2f}" for n in names)
        if len(names) > 1:
            speed = best["python"] / best["cython"] if best["cython"] > 0 else math.inf
            row += f"{speed:10.2f}{_diff(results['python'], results['cython']):14.1e}"
        print(row)


if __name__ == "__main__":
    main()
