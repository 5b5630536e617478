"""Benchmark the compiled kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_backends.py
"""

import time

import numpy as np

from uqsynth._threads import single_thread_blas
from uqsynth import backends
from uqsynth.backends import numpy_impl
from uqsynth.render import ViewPoint, builtin_volume, default_transfer_function
from uqsynth.render import raycast as rc


def timeit(fn, reps=10):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps * 1e3


def bench_conv():
    rng = np.random.default_rng(0)
    rows = []
    for n, c, hw, cout in [(64, 64, 8, 32), (64, 32, 16, 16), (64, 16, 32, 16)]:
        xp = rng.standard_normal((n, c, hw + 2, hw + 2)).astype(np.float32)
        wm = rng.standard_normal((cout, c * 9)).astype(np.float32)
        go = rng.standard_normal((n, cout, hw, hw)).astype(np.float32)
        fwd_cy = timeit(lambda: backends.conv_forward(xp, wm, 3, 3))
        fwd_np = timeit(lambda: numpy_impl.conv_forward(xp, wm, 3, 3))
        bwd_cy = timeit(lambda: backends.conv_backward(xp, wm, go, 3, 3), reps=5)
        bwd_np = timeit(lambda: numpy_impl.conv_backward(xp, wm, go, 3, 3), reps=5)
        rows.append((f"conv {n}x{c}x{hw}^2 -> {cout}", fwd_cy, fwd_np, bwd_cy, bwd_np))
    return rows


def bench_raycast():
    vol = builtin_volume("blobs", (64, 64, 64), seed=1)
    tf = default_transfer_function()
    rows = []
    for res in (32, 64):
        view = ViewPoint(33.0, 21.0)

        def render_with(kernel):
            orig = backends.raycast
            backends.raycast = kernel
            try:
                rc.render(vol, tf, view, res)
            finally:
                backends.raycast = orig

        cy = timeit(lambda: render_with(backends.raycast), reps=5)
        np_ = timeit(lambda: render_with(numpy_impl.raycast), reps=5)
        rows.append((f"raycast 64^3 -> {res}x{res}", cy, np_, None, None))
    return rows


def main():
    if backends.BACKEND != "cython":
        print("compiled backend not available; nothing to compare")
        return
    print(f"backend: {backends.BACKEND} (vs numpy fallback), single BLAS thread\n")
    header = f"{'kernel':32s} {'cython ms':>10s} {'numpy ms':>10s} {'speedup':>8s}"
    with single_thread_blas():
        for title, rows in (("convolution", bench_conv()), ("ray casting", bench_raycast())):
            print(title)
            print(header)
            for name, cy_f, np_f, cy_b, np_b in rows:
                print(f"{name:32s} {cy_f:10.2f} {np_f:10.2f} {np_f / cy_f:7.1f}x")
                if cy_b is not None:
                    print(f"{name + ' (backward)':32s} {cy_b:10.2f} {np_b:10.2f} "
                          f"{np_b / cy_b:7.1f}x")
            print()


if __name__ == "__main__":
    main()
