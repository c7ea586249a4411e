"""Compare the compiled and numpy kernels on representative workloads.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from mahlerlim import kernels
from mahlerlim.laurent import parse, substitute
from mahlerlim.measures import _pack, kronecker_multipliers, _shift
from mahlerlim.roots import initial_guesses
from mahlerlim.torushom import base_b_family, left_kernel_basis, parse_matrix


def _torus_job():
    polys = [parse("Z1 + Z2 + Z3 + 1")]
    packed = _pack(polys)
    alpha = np.array(kronecker_multipliers(3), dtype=np.uint64)
    shift = _shift(0, 0, 3)
    return lambda: kernels.torus_sum(alpha, shift, 0, 1 << 16, *packed, 0, -690.0)


def _circle_job():
    p = substitute(parse("Z1 + Z2 + Z3 + 1"), base_b_family(3, 1, 20))
    packed = _pack([p], flat=True)
    t = np.linspace(0.0, 1.0, 200_000, endpoint=False)
    return lambda: kernels.circle_logabs(*packed, t, -690.0)


def _aberth_job():
    p = substitute(parse("Z1 + Z2 + Z3 + 1"), base_b_family(3, 1, 30))
    exps = np.array([e[0] for e in p.terms], dtype=np.int64)
    coefs = np.array([complex(c) for c in p.terms.values()])
    z0 = initial_guesses(exps, coefs)

    def run():
        z = z0.copy()
        kernels.aberth(exps, coefs, z, 1e-12, 500)
    return run


def _shell_job():
    A = parse_matrix("3,5;7,-2;4,9;1,1;2,-6")
    pivots, free, N, D = left_kernel_basis(A)
    return lambda: [kernels.shell_hits(N, D, pivots, free, A.rows, s, 10 ** 6) for s in range(1, 9)]


JOBS = {
    "torus_sum (2^16 points, T^3)": _torus_job,
    "circle_logabs (2e5 angles, degree 421)": _circle_job,
    "aberth (degree 931)": _aberth_job,
    "shell_hits (3 free coords, shells 1..8)": _shell_job,
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = list(kernels.available_backends())
    print(f"{'kernel':<42}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    prev = kernels.BACKEND
    try:
        for name, make in JOBS.items():
            row = {}
            for b in backends:
                kernels.use_backend(b)
                row[b] = best_of(make(), args.repeat)
            speed = row["python"] / row["cython"] if "cython" in row else float("nan")
            print(f"{name:<42}" + "".join(f"{row[b]:>11.4f}s" for b in backends) + f"{speed:>9.1f}x")
    finally:
        kernels.use_backend(prev)


if __name__ == "__main__":
    main()
