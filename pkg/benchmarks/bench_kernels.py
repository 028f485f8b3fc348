"""Time the numba and pure-numpy kernel paths side by side.

    python benchmarks/bench_kernels.py [--repeat 20]

Shapes mirror the authenticator's conv blocks at the desk and paper presets
and the EER threshold sweep at typical test-set sizes.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from trajauth.nn import kernels


def _time(fn, repeat):
    fn()  # warm-up / JIT
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def conv_cases():
    # (label, N, C_in, C_out, k, L)
    return [
        ("desk block1", 32, 3, 32, 8, 50),
        ("desk block2", 32, 32, 64, 5, 50),
        ("paper block2", 32, 128, 256, 5, 90),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=10)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)

    print(f"{'kernel':32s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for label, n, c, o, k, L in conv_cases():
        xpad = rng.standard_normal((n, c, L + k - 1)).astype(np.float32)
        w = rng.standard_normal((o, c, k)).astype(np.float32)
        gy = rng.standard_normal((n, o, L)).astype(np.float32)
        for name, f_np, f_nb in (
            ("fwd", lambda: kernels.conv1d_forward_numpy(xpad, w), lambda: kernels.conv1d_forward_numba(xpad, w)),
            ("bwd", lambda: kernels.conv1d_backward_numpy(xpad, w, gy),
             lambda: kernels.conv1d_backward_numba(xpad, w, gy)),
        ):
            a, b = _time(f_np, args.repeat), _time(f_nb, args.repeat)
            print(f"{'conv1d ' + name + ' ' + label:32s} {a * 1e3:10.3f} {b * 1e3:10.3f} {a / b:8.2f}")

    for n in (1_000, 100_000):
        g = np.sort(rng.random(n))
        i = np.sort(rng.random(n))
        th = np.unique(np.concatenate([g, i]))
        a = _time(lambda: kernels.count_at_thresholds_numpy(i, th), args.repeat)
        b = _time(lambda: kernels.count_at_thresholds_numba(i, th), args.repeat)
        print(f"{f'eer counts n={n}':32s} {a * 1e3:10.3f} {b * 1e3:10.3f} {a / b:8.2f}")
    print(f"active backend: {kernels.backend()}")


if __name__ == "__main__":
    main()
