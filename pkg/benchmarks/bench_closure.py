"""Compare the compiled and pure-Python Warshall closure kernels.

Usage::

    python benchmarks/bench_closure.py [--sizes 16 64 128] [--repeat 5] [--density 0.1]

Random boolean graphs are closed by every available backend; the script
checks that the backends agree and prints the best-of-``repeat`` time per size.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from hetprice._closure import BACKENDS


def random_graph(n: int, density: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.random((n, n)) < density


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 128, 256])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--density", type=float, default=0.05)
    args = ap.parse_args(argv)

    names = sorted(BACKENDS)
    print(f"{'n':>6} " + " ".join(f"{name + ' (ms)':>14}" for name in names) + f" {'speedup':>9}")
    for n in args.sizes:
        adj = random_graph(n, args.density, seed=n)
        results = {name: BACKENDS[name](adj) for name in names}
        ref_reach, _ = results["python"]
        for name, (reach, _) in results.items():
            if not np.array_equal(reach, ref_reach):
                raise SystemExit(f"backend {name} disagrees at n={n}")
        times = {
            name: min(timeit.repeat(lambda f=BACKENDS[name]: f(adj), number=1, repeat=args.repeat)) * 1e3
            for name in names
        }
        speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{n:>6} " + " ".join(f"{times[name]:>14.3f}" for name in names) + f" {speedup:>8.1f}x")


if __name__ == "__main__":
    main()
