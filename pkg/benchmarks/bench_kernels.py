"""Time the compiled and pure-Python kernels on the same inputs.

Run ``python3 benchmarks/bench_kernels.py [--n 5000] [--repeat 5]``.  Each
line reports the best wall time per backend and the speed-up, after
checking that both backends return identical arrays.
"""
import argparse
import time

import numpy as np

from dbcs.kernels import MEAN_PROPORTIONAL, backends


def _cases(n, K, rng):
    potentials = rng.binomial(1, [0.15, 0.27] + [0.2] * (K - 2), size=(n, K)).astype(np.float64)
    uniforms = rng.random(n)
    x = rng.binomial(1, 0.5, n).astype(np.float64)
    y = x + rng.standard_normal(n)
    return {
        "compensated_cumsum": (rng.standard_normal(n),),
        "policy_path": (potentials, uniforms, n // 10, 0.01, -1.0, MEAN_PROPORTIONAL),
        "ar1_filter": (rng.standard_normal(n), 0.1),
        "ls_predictions": (x, y, 10.0),
    }


def _best(fn, args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--K", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    impls = backends()
    cases = _cases(args.n, args.K, np.random.default_rng(0))
    print(f"n={args.n} K={args.K} backends={','.join(impls)}")
    print(f"{'kernel':<20}{'python [ms]':>14}{'cython [ms]':>14}{'speed-up':>10}  same")
    for name, cargs in cases.items():
        t_py, out_py = _best(getattr(impls["python"], name), cargs, args.repeat)
        if "cython" in impls:
            t_cy, out_cy = _best(getattr(impls["cython"], name), cargs, args.repeat)
            same = _same(out_py, out_cy)
            print(f"{name:<20}{t_py * 1e3:>14.3f}{t_cy * 1e3:>14.3f}{t_py / t_cy:>10.1f}  {same}")
        else:
            print(f"{name:<20}{t_py * 1e3:>14.3f}{'-':>14}{'-':>10}  -")


if __name__ == "__main__":
    main()
