"""Benchmark the affine RK4 kernels: numba @njit vs pure numpy.

Usage: python benchmarks/bench_rk4.py [--steps 100000] [--batch 360]
"""

import argparse
import time

import numpy as np

from switchdwell import kernels


def time_call(fn, *args, repeat=5):
    fn(*args)  # warm-up (includes jit compilation)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--batch", type=int, default=360)
    args = ap.parse_args()

    A = np.array([[-1.0, -1.0], [1.0, -1.0]])
    b = np.array([1.0, 1.0])
    x0 = np.array([3.0, -2.0])
    X0 = np.random.default_rng(0).normal(size=(args.batch, 2))
    h = 1e-3

    rows = []
    if kernels.backend() == "numba":
        rows.append(
            ("path (numba)", time_call(kernels.affine_rk4_path, A, b, x0, h, args.steps, 0.0))
        )
        rows.append(
            (
                "batch (numba)",
                time_call(
                    kernels.affine_rk4_batch_final,
                    np.ascontiguousarray(A.T), b, X0, h, args.steps, 0.0,
                ),
            )
        )
    else:
        print("numba backend unavailable or disabled; timing numpy only")
    rows.append(
        ("path (numpy)", time_call(kernels.numpy_affine_rk4_path, A, b, x0, h, args.steps, 0.0))
    )
    rows.append(
        (
            "batch (numpy)",
            time_call(
                kernels.numpy_affine_rk4_batch_final,
                np.ascontiguousarray(A.T), b, X0, h, args.steps, 0.0,
            ),
        )
    )

    print(f"steps={args.steps} batch={args.batch} backend={kernels.backend()}")
    for name, t in rows:
        print(f"  {name:<16} {t * 1e3:10.2f} ms")
    by_name = dict(rows)
    for kind in ("path", "batch"):
        nb, np_ = by_name.get(f"{kind} (numba)"), by_name.get(f"{kind} (numpy)")
        if nb and np_:
            print(f"  {kind}: numba speedup {np_ / nb:.1f}x")


if __name__ == "__main__":
    main()
