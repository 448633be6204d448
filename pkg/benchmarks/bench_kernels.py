"""Time the numba and numpy kernel backends side by side.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 200000]

Each kernel is warmed up once (numba compiles on first call) and then timed
as the best of ``--repeat`` runs.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from kostant_lab import _kernels


def cases(size: int):
    rng = np.random.default_rng(0)
    h = rng.uniform(-1, 1, size)
    L = rng.uniform(-3, 3, size)
    f = rng.normal(size=(41, 41)) + 1j * rng.normal(size=(41, 41))
    f[0, 0] = 0
    return {
        "homotopy_exact": lambda ns: ns.homotopy_exact(h, L, 1),
        "homotopy_quad": lambda ns: ns.homotopy_quad(h[: size // 20], L[: size // 20], 1, 1e-10),
        "jet_recursion": lambda ns: ns.jet_recursion(f, 40),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=200_000)
    args = ap.parse_args(argv)
    backends = {"numpy": _kernels.numpy_impl}
    if _kernels.numba_impl is not None:
        backends["numba"] = _kernels.numba_impl
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases(args.size).items():
        best = {}
        for b, ns in backends.items():
            fn(ns)
            best[b] = min(timeit.repeat(lambda: fn(ns), number=1, repeat=args.repeat))
        speed = best["numpy"] / best["numba"] if "numba" in best else float("nan")
        print(f"{name:<16}" + "".join(f"{best[b] * 1e3:>10.2f}ms" for b in backends) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
