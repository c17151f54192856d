"""Timing for the two batch-evaluation backends.

Runs the jitted kernel and the numpy fallback on identical inputs, checks
the outputs are bitwise equal, and reports the best wall time of each over
several repeats.  The numba path parallelizes over samples; pin it with
NUMBA_NUM_THREADS to measure scaling.

Usage: python3 benchmarks/bench_evaluate.py [--samples 200000] [--repeats 5]
"""

import argparse
import time

import numpy as np

import wienerchaos as wc
from wienerchaos import _accel


def _workloads(samples: int):
    rng = np.random.default_rng(0)

    # family-style workload: sparse second-order kernel on a wide space
    vec = wc.generate(wc.FamilySpec("vanishing_overlap", (2, 2), (1, 1), theta=0.5), 256)
    element = vec.groups[0][0]
    dim = element.space.dimension
    yield "blocked order 2", element, rng.standard_normal((samples, dim))

    # denser workload: random third-order kernel on a narrow space
    space = wc.HilbertSpace(10)
    entries = {}
    while len(entries) < 200:
        idx = tuple(sorted(int(i) for i in rng.integers(1, 11, size=3)))
        entries[idx] = float(rng.normal())
    element = wc.ChaosElement(wc.SymmetricTensor(space, 3, entries))
    yield "random order 3", element, rng.standard_normal((samples, 10))


def _best(fn, args, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"backend available: {_accel.backend_name()}, samples per run: {args.samples}")
    header = f"{'workload':<16} {'entries':>7} {'numpy s':>9} {'numba s':>9} {'speedup':>8}  bitwise"
    print(header)
    print("-" * len(header))

    for name, element, x in _workloads(args.samples):
        prepared = element.prepared()
        x = np.ascontiguousarray(x)
        out_np = _accel._evaluate_numpy(*prepared, x)
        t_np = _best(_accel._evaluate_numpy, (*prepared, x), args.repeats)
        if _accel.HAVE_NUMBA:
            _accel._evaluate_numba(*prepared, x[:64])  # compile outside the timed region
            out_nb = _accel._evaluate_numba(*prepared, x)
            t_nb = _best(_accel._evaluate_numba, (*prepared, x), args.repeats)
            same = np.array_equal(out_np, out_nb)
            print(
                f"{name:<16} {prepared[3].shape[0]:>7} {t_np:>9.4f} {t_nb:>9.4f}"
                f" {t_np / t_nb:>7.1f}x  {same}"
            )
            if not same:
                raise SystemExit("backend outputs differ")
        else:
            print(f"{name:<16} {prepared[3].shape[0]:>7} {t_np:>9.4f} {'n/a':>9} {'n/a':>8}  n/a")


if __name__ == "__main__":
    main()
