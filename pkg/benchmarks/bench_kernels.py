"""Compare the compiled and numpy integrand kernels.

    python benchmarks/bench_kernels.py --N 6 --batch 20000 --repeat 5

Prints per-call timings for both backends and the maximum difference between
their outputs on the same eigenvalue batch.
"""

import argparse
import timeit

import numpy as np

from mixedratios import _kernels_py, haar
from mixedratios.haar import POLE_GUARD

try:
    from mixedratios import _kernels
except ImportError:
    _kernels = None

QUERIES = {
    "ratio": dict(A=[0.9, 0.3 + 0.2j], B=[0.4], C=[0.5], D=[0.2 - 0.1j], E=[], F=[]),
    "log-ders": dict(A=[], B=[], C=[], D=[], E=[0.4, 0.3j], F=[0.4]),
    "mixed": dict(A=[0.8], B=[0.3], C=[0.2], D=[0.2], E=[0.2], F=[0.15]),
}


def _sets(q):
    return [np.ascontiguousarray(q[k], dtype=np.complex128) for k in "ABCDEF"]


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--N", type=int, default=6)
    parser.add_argument("--batch", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    eigs = np.ascontiguousarray(haar.sample_haar_batch(args.N, args.batch, haar.make_stream(args.seed)))
    print(f"N={args.N} batch={args.batch} repeat={args.repeat}")
    print(f"{'query':<10} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, q in QUERIES.items():
        sets = _sets(q)
        py_call = lambda: _kernels_py.mixed_ratio_batch(eigs, *sets, False, POLE_GUARD)
        t_py = min(timeit.repeat(py_call, number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:<10} {t_py:10.2f} {'n/a':>10} {'':>8} {'':>11}")
            continue
        cy_call = lambda: _kernels.mixed_ratio_batch(eigs, *sets, False, POLE_GUARD)
        t_cy = min(timeit.repeat(cy_call, number=1, repeat=args.repeat)) * 1e3
        diff = np.max(np.abs(py_call()[0] - cy_call()[0]))
        print(f"{name:<10} {t_py:10.2f} {t_cy:10.2f} {t_py / t_cy:8.2f} {diff:11.2e}")


if __name__ == "__main__":
    main()
