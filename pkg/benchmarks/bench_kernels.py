"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from pilms import _kernels_py
from pilms.symcore import _position_table

try:
    from pilms import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    for n, rows in [(6, 100_000), (12, 100_000), (20, 50_000)]:
        signs = np.ascontiguousarray(rng.choice(np.array([-1, 1], dtype=np.int8), size=(rows, n)))
        yield f"esym_rows n={n} rows={rows}", "esym_rows", (signs,)
    for n in (6, 8, 10):
        pos = np.ascontiguousarray(_position_table(n))
        coef = rng.normal(size=4**n)
        yield f"bin_pauli_types n={n}", "bin_pauli_types", (coef, n, pos)
        values = rng.normal(size=int(pos.max()) + 1)
        yield f"spread_pauli_types n={n}", "spread_pauli_types", (values, n, pos)


def best_time(fn, args, repeat):
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the numpy fallback is available")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<28} {'python [ms]':>12} {'compiled [ms]':>14} {'speedup':>8}")
    for label, name, fargs in cases(rng):
        t_py = best_time(getattr(_kernels_py, name), fargs, args.repeat)
        if _kernels is None:
            print(f"{label:<28} {t_py * 1e3:12.2f} {'-':>14} {'-':>8}")
            continue
        t_c = best_time(getattr(_kernels, name), fargs, args.repeat)
        same = np.allclose(getattr(_kernels, name)(*fargs), getattr(_kernels_py, name)(*fargs))
        flag = "" if same else "  MISMATCH"
        print(f"{label:<28} {t_py * 1e3:12.2f} {t_c * 1e3:14.2f} {t_py / t_c:8.1f}{flag}")


if __name__ == "__main__":
    main()
