"""Compare the compiled and pure-Python search kernels.

Usage: python benchmarks/bench_kernel.py [--repeat N] [--max-k K]
"""

import argparse
import time
from pathlib import Path

import numpy as np

from freeknots.dataset import DataSet, load_csv
from freeknots.search import BACKENDS, SearchOptions, run_search

HERE = Path(__file__).resolve().parent
TITANIUM = HERE.parent / "tests" / "data" / "titanium_heat.csv"


def cases(max_k):
    rng = np.random.default_rng(7)
    x = np.arange(30.0)
    yield "random-30", DataSet(x, rng.uniform(size=x.size)), range(1, min(max_k, 3) + 1)
    if TITANIUM.exists():
        yield "titanium-49", load_csv(TITANIUM), range(2, max_k + 1)


def best_time(data, k, backend, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = run_search(data, k, SearchOptions(), backend=backend)
        times.append(time.perf_counter() - t0)
    return min(times), res


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--max-k", type=int, default=4)
    args = ap.parse_args()
    names = sorted(BACKENDS)
    print(f"{'case':<13}{'k':>3}{'leaves':>10}" + "".join(f"{n + ' [s]':>14}" for n in names)
          + f"{'speedup':>10}  same")
    for label, data, ks in cases(args.max_k):
        for k in ks:
            row = {n: best_time(data, k, n, args.repeat) for n in names}
            t = {n: row[n][0] for n in names}
            res = [row[n][1] for n in names]
            same = all(r.best.source_vector == res[0].best.source_vector
                       and r.best.residual == res[0].best.residual for r in res)
            speed = t["python"] / t["cython"] if "cython" in t else float("nan")
            print(f"{label:<13}{k:>3}{res[0].stats.examined:>10}"
                  + "".join(f"{t[n]:>14.4f}" for n in names)
                  + f"{speed:>10.1f}  {same}")


if __name__ == "__main__":
    main()
