"""Benchmark of the compiled vs pure-numpy cone-projection backends.

The product projection is the solver's inner-loop hot spot (called once
per ADMM iteration), so the two backends are timed on cone layouts that
resemble real programs: many small nonneg/zero blocks, a few SOC blocks,
and a tail of exponential cones.

Usage:  python benchmarks/bench_kernels.py [--reps 2000]
"""

import argparse
import time

import numpy as np

from rerm.cones import Cone
from rerm.kernels import HAVE_COMPILED, ConeProjector


def _layout(rng, m_target):
    cones = []
    m = 0
    while m < m_target:
        r = rng.random()
        if r < 0.35:
            c = Cone.nonneg(int(rng.integers(1, 8)))
        elif r < 0.55:
            c = Cone.zero(int(rng.integers(1, 5)))
        elif r < 0.85:
            c = Cone.soc(int(rng.integers(2, 9)))
        else:
            c = Cone.exp()
        cones.append(c)
        m += c.dim
    return cones


def _time(projector, vs, reps):
    # warm up, then best of three passes
    for v in vs[:10]:
        projector(v)
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for i in range(reps):
            projector(vs[i % len(vs)])
        best = min(best, time.perf_counter() - t0)
    return best / reps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=2000)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'m':>6} {'pure (us)':>12} {'compiled (us)':>14} {'speedup':>8}")
    for m_target in (50, 200, 1000, 5000):
        cones = _layout(rng, m_target)
        pure = ConeProjector(cones, compiled=False)
        vs = [rng.normal(size=pure.dim) for _ in range(50)]
        t_pure = _time(pure, vs, args.reps)
        if HAVE_COMPILED:
            fast = ConeProjector(cones, compiled=True)
            # the backends must agree before their timings mean anything
            for v in vs[:20]:
                np.testing.assert_allclose(fast(v), pure(v), atol=1e-12)
            t_fast = _time(fast, vs, args.reps)
            print(
                f"{pure.dim:>6} {t_pure * 1e6:>12.1f} {t_fast * 1e6:>14.1f} "
                f"{t_pure / t_fast:>7.1f}x"
            )
        else:
            print(f"{pure.dim:>6} {t_pure * 1e6:>12.1f} {'n/a':>14} {'n/a':>8}")


if __name__ == "__main__":
    main()
