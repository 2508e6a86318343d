"""Time the numba kernels against their numpy twins.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat R] [--out FILE]``.
Each kernel is warmed up once (numba compiles on first call), then timed as
the best of ``R`` runs.  Results are checked for agreement before timing.
"""

import argparse
import csv
import sys
import time

import numpy as np

from tmk.kernels import get_backend


def cases(rng):
    pts = rng.integers(-128, 129, size=(400_000, 3))
    grid = rng.standard_normal((64, 64, 32, 2, 2)) + 1j * rng.standard_normal((64, 64, 32, 2, 2))
    mats = rng.standard_normal((200_000, 2, 2)) + 1j * rng.standard_normal((200_000, 2, 2))
    mats3 = rng.standard_normal((50_000, 3, 3)) + 1j * rng.standard_normal((50_000, 3, 3))
    t = rng.uniform(-0.5, 1.5, 1_000_000)
    steps, K, m = 200, 400, 2
    a_nodes = np.broadcast_to(np.eye(m) * (1 + np.arange(K))[None, :, None, None] / 10,
                              (steps + 1, K, m, m)).astype(np.complex128)
    a_stage = np.ascontiguousarray(a_nodes[:-1])
    f_nodes = np.ones((steps + 1, K, m), dtype=np.complex128)
    f_stage = np.ones((steps, K, m), dtype=np.complex128)
    u0 = np.ones((K, m), dtype=np.complex128)
    return {
        "cell_indices": (lambda b: b.cell_indices(pts)),
        "cell_histogram": (lambda b: b.cell_histogram(np.array([-64, -64, -64]), np.array([64, 64, 64]), 30)),
        "corner_differences": (lambda b: b.corner_differences(grid, 3)),
        "opnorms_2x2": (lambda b: b.opnorms(mats)),
        "opnorms_3x3": (lambda b: b.opnorms(mats3)),
        "smooth_step": (lambda b: b.smooth_step(t)),
        "trbdf2": (lambda b: b.trbdf2(a_nodes, a_stage, f_nodes, f_stage, u0, 0.005, 2 - 2 ** 0.5)),
    }


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)
    nb, npk = get_backend("numba"), get_backend("numpy")
    rows = []
    for name, run in cases(np.random.default_rng(0)).items():
        r_nb, r_np = run(nb), run(npk)  # warm-up and agreement
        if not np.allclose(np.asarray(r_nb), np.asarray(r_np), rtol=1e-10, atol=1e-12):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_nb, t_np = best_of(lambda: run(nb), args.repeat), best_of(lambda: run(npk), args.repeat)
        rows.append({"kernel": name, "numba_s": f"{t_nb:.4f}", "numpy_s": f"{t_np:.4f}",
                     "speedup": f"{t_np / t_nb:.2f}"})
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.out:
        fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
