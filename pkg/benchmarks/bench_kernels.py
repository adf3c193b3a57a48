"""Timing comparison of the numba and numpy kernel backends.

Runs every shared kernel on identical inputs, checks that the two
backends agree to round-off, and prints per-call timings. Grid size and
repetitions can be overridden on the command line:

    python benchmarks/bench_kernels.py --nx 192 --ny 144 --repeat 200
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from drypore import _kernels_numpy
from drypore.grid import pad

try:
    from drypore import _kernels_numba
except ImportError:
    _kernels_numba = None


def _inputs(nx, ny, rng):
    dx = 1.0 / nx
    dy = 1.0 / ny
    f = rng.random((ny, nx))
    w = rng.random((ny, nx)) + 0.1
    u = rng.standard_normal((ny, nx + 1))
    v = rng.standard_normal((ny + 1, nx))
    bx = np.zeros((ny, nx + 1))
    by = np.zeros((ny + 1, nx))
    bx[:, 1:-1] = rng.random((ny, nx - 1)) + 0.1
    by[1:-1, :] = rng.random((ny - 1, nx)) + 0.1
    rhs = rng.standard_normal((ny, nx))
    rhs -= rhs.mean()
    x0 = np.zeros((ny, nx))
    return {
        "ksum": (f,),
        "kdot": (f, w),
        "laplacian": (pad(f), dx, dy),
        "div_faces": (u, v, dx, dy),
        "norm_grad": (pad(f), dx, dy),
        "div_w_grad": (pad(f), pad(w), dx, dy),
        "upwind_advect": (pad(f), u, v, dx, dy),
        "curvature_gradnorm": (pad(f), dx, dy, 1e-8 / max(dx, dy)),
        "poisson_cg": (rhs, bx, by, dx, dy, x0, 1e-8, 10 * nx * ny, False),
    }


def _time_call(fn, args, repeat):
    fn(*args)  # warm-up (and JIT compile for numba)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nx", type=int, default=192)
    ap.add_argument("--ny", type=int, default=144)
    ap.add_argument("--repeat", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cases = _inputs(args.nx, args.ny, np.random.default_rng(args.seed))
    print(f"grid {args.nx}x{args.ny}, {args.repeat} calls per timing")
    print(f"{'kernel':<20} {'numpy':>12} {'numba':>12} {'speedup':>9}  agree")
    for name, call in cases.items():
        repeat = max(1, args.repeat // 20) if name == "poisson_cg" else args.repeat
        ref = getattr(_kernels_numpy, name)(*call)
        t_np = _time_call(getattr(_kernels_numpy, name), call, repeat)
        if _kernels_numba is None:
            print(f"{name:<20} {t_np * 1e6:>10.1f}us {'n/a':>12}")
            continue
        out = getattr(_kernels_numba, name)(*call)
        t_nb = _time_call(getattr(_kernels_numba, name), call, repeat)
        if name == "poisson_cg":
            ok = np.allclose(out[0] - np.mean(out[0]), ref[0] - np.mean(ref[0]),
                             atol=1e-6)
        else:
            ok = np.allclose(out, ref, rtol=1e-12, atol=1e-12)
        print(f"{name:<20} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us "
              f"{t_np / t_nb:>8.1f}x  {ok}")


if __name__ == "__main__":
    main()
