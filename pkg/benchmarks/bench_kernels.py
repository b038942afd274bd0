"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from gsdtail import kernels
from gsdtail.model import ModelSpec
from gsdtail.sampler import make_rng, sample_sd


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--starts", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    try:
        kernels._pick("cython")
    except ImportError:
        print("compiled extension not built; only the fallback is available")
        return

    k = args.k
    sigma = 0.5 * np.eye(k) + 0.5
    spec = ModelSpec.build(np.full(k, 0.7), np.linalg.cholesky(sigma).T)
    rng = make_rng(0)
    R = spec.radial.sample(rng, args.n)
    U = sample_sd(spec.alpha, rng, args.n)
    T = np.array([np.full(k, 1.0), np.full(k, 2.0)])

    print(f"tail_hits: n={args.n}, k={k}, {len(T)} threshold rows")
    res = {}
    for name in ("cython", "python"):
        t, hits = best_of(lambda: kernels.tail_hits(R, U, spec.mixing.A, T, backend=name), args.repeat)
        res[name] = t
        print(f"  {name:7s} {t * 1e3:9.1f} ms  hits={hits.tolist()}")
    print(f"  speedup {res['python'] / res['cython']:.1f}x")

    P = np.linalg.inv(sigma)
    b = np.linspace(1.0, -0.5, k)
    X0 = make_rng(1).normal(size=(args.starts, k)) * 3
    print(f"pgd_box_qp: k={k}, {args.starts} starts")
    for name in ("cython", "python"):
        t, (_, vals, conv) = best_of(lambda: kernels.pgd_box_qp(P, b, X0, backend=name), 1)
        res[name] = t
        print(f"  {name:7s} {t * 1e3:9.1f} ms  min={vals.min():.15g} converged={int(conv.sum())}")
    print(f"  speedup {res['python'] / res['cython']:.1f}x")


if __name__ == "__main__":
    main()
