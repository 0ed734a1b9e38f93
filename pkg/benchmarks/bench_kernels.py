"""Compare the numba and numpy implementations of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Both paths are imported side by side (the env flag only selects the
default dispatch), checked for agreement, then timed with timeit.
"""
import argparse
import timeit

import numpy as np

from fracground import _kernels
from fracground.fractional import _kernel_table
from fracground.grid import Grid


def cases():
    rng = np.random.default_rng(0)
    for dim, n in ((1, 256), (2, 32), (2, 64)):
        g = Grid(dim, n, 8.0)
        u = rng.standard_normal(g.shape)
        table = np.asarray(_kernel_table(g, 0.5, 2))
        yield f"pair_sum dim={dim} n={n}", (lambda f, u=u, t=table: f(u, t)), ("pair_sum_numba", "pair_sum_numpy")
    for n in (256, 1024):
        u = rng.standard_normal((n, n)) * 2
        args = (1.0, 1.0, 1.0, 4.0, 3.0)
        yield (f"model_terms {n}x{n}", (lambda f, u=u, a=args: f(u, *a)),
               ("model_terms_numba", "model_terms_numpy"))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (or disabled by FRACGROUND_DISABLE_NUMBA); nothing to compare")
        return
    print(f"{'case':28s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>8s}")
    for name, call, (fast, slow) in cases():
        f_nb, f_np = getattr(_kernels, fast), getattr(_kernels, slow)
        a, b = call(f_nb), call(f_np)  # also warms up the jit
        assert np.allclose(a, b, rtol=1e-10, atol=1e-12), name
        t_nb = min(timeit.repeat(lambda: call(f_nb), number=1, repeat=args.repeat))
        t_np = min(timeit.repeat(lambda: call(f_np), number=1, repeat=args.repeat))
        print(f"{name:28s} {1e3 * t_nb:12.3f} {1e3 * t_np:12.3f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
