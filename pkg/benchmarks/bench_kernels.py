"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 32 64 128] [--repeat 3]
"""

import argparse
import timeit

import numpy as np

from fracdiff import kernels
from fracdiff.riesz import build_stencil
from fracdiff.structured import ShiftedToeplitz1D, SymToeplitz


def shifted_riesz(n):
    # a shifted Riesz matrix, the kind of operator the dense paths see
    G = SymToeplitz(build_stencil(1.8, max(1, n - 1)).symbol(n))
    return ShiftedToeplitz1D(50.0, float(n) ** 1.8, G).to_dense()


def bench(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 1 << 14:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128, 256])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    backends = ["python"] + (["compiled"] if kernels.HAVE_COMPILED else [])
    if not kernels.HAVE_COMPILED:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':<10}{'n':>6}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    previous = kernels.BACKEND
    try:
        for n in args.sizes:
            A = shifted_riesz(n)
            b = np.ones(n)
            L = kernels.cholesky(A)
            cases = {
                "jacobi": lambda: kernels.jacobi_eigvalsh(A),
                "cholesky": lambda: kernels.cholesky(A),
                "cho_solve": lambda: kernels.cho_solve(L, b),
            }
            for name, fn in cases.items():
                if name == "jacobi" and n > 128:
                    continue
                timings = []
                for backend in backends:
                    kernels.use_backend(backend)
                    timings.append(bench(fn, args.repeat))
                speed = f"{timings[0] / timings[-1]:>9.1f}x" if len(timings) == 2 else ""
                print(f"{name:<10}{n:>6}" + "".join(f"{t * 1e3:>12.3f}ms" for t in timings) + speed)
    finally:
        kernels.use_backend(previous)


if __name__ == "__main__":
    main()
