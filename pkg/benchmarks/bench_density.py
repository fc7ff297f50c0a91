"""Compare the compiled angle-Jacobian kernel with the numpy fallback.

    python3 benchmarks/bench_density.py [--batch 65536] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from graphquant import weights as W
from graphquant._density_py import jacobian_det as numpy_det
from graphquant.graphs import corolla, parse_key

GRAPHS = [
    corolla(2),
    corolla(3),
    parse_key("n=2;m=2;E=[(1,B1),(1,B2),(2,B1),(2,B2)]"),
    parse_key("n=2;m=2;E=[(1,2),(1,B1),(2,B1),(2,B2)]"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=65536)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    try:
        from graphquant._density import jacobian_det as compiled_det
    except ImportError:
        print("compiled kernel not built; only the numpy kernel is available")
        return
    print(f"active kernel: {W.KERNEL}")
    print(f"{'graph':45} {'numpy ms':>9} {'cython ms':>10} {'speedup':>8} {'diff / scale':>13}")
    rng = np.random.default_rng(0)
    for g in GRAPHS:
        lay = W._layout(g.n, g.m)
        zx, zy, t, _ = W._sample_batch(lay, rng, args.batch)
        src, tgt = W._edge_arrays(g)
        call = (np.ascontiguousarray(zx), np.ascontiguousarray(zy), np.ascontiguousarray(t),
                src, tgt, lay.colx, lay.coly, lay.colt)
        a, b = numpy_det(*call), compiled_det(*call)
        diff = float(np.max(np.abs(a - b)) / np.max(np.abs(a)))
        slow = min(timeit.repeat(lambda: numpy_det(*call), number=1, repeat=args.repeat))
        fast = min(timeit.repeat(lambda: compiled_det(*call), number=1, repeat=args.repeat))
        print(f"{str(g):45} {slow * 1e3:9.2f} {fast * 1e3:10.2f} {slow / fast:8.1f} {diff:13.2e}")


if __name__ == "__main__":
    main()
