"""Compare the compiled and numpy kernel backends on RAS and varimax.

Usage: ``python benchmarks/bench_kernels.py [--repeat N]``
"""

import argparse
import timeit

import numpy as np

from ioinfra.kernels import available_backends


def ras_case(rng, n):
    M = rng.uniform(0, 10, (n, n)) * (rng.random((n, n)) < 0.6) + np.eye(n)
    hidden = rng.uniform(0.5, 2, n)[:, None] * M * rng.uniform(0.5, 2, n)
    return M, hidden.sum(1), hidden.sum(0)


def bench_ras(impl, case, repeat):
    M, u, v = case

    def run():
        r, s = np.ones(len(u)), np.ones(len(v))
        hist = np.empty(10000)
        impl.ras_sweeps(M, u, v, r, s, hist, 1e-9, 10000)

    return min(timeit.repeat(run, number=1, repeat=repeat))


def bench_varimax(impl, L, repeat):
    def run():
        impl.varimax_sweeps(L.copy(), np.eye(L.shape[1]), 1e-10, 1000)

    return min(timeit.repeat(run, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = available_backends()
    cases = [("ras n=8", "ras", ras_case(rng, 8)),
             ("ras n=31", "ras", ras_case(rng, 31)),
             ("ras n=56", "ras", ras_case(rng, 56))]
    for p, k in ((16, 4), (46, 4), (46, 8)):
        L = rng.normal(size=(p, k))
        cases.append((f"varimax p={p} k={k}", "varimax", L / np.linalg.norm(L, axis=1)[:, None]))
    names = sorted(backends)
    print(f"{'case':<22}" + "".join(f"{n + ' (ms)':>16}" for n in names) + f"{'speedup':>10}")
    for label, kind, case in cases:
        times = {}
        for n in names:
            fn = bench_ras if kind == "ras" else bench_varimax
            times[n] = fn(backends[n], case, args.repeat) * 1e3
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<22}" + "".join(f"{times[n]:>16.3f}" for n in names) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
