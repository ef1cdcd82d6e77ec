"""Benchmark the compiled kernel core against the numpy fallback.

Times the fused power-sum reduction (the Luxemburg bisection workhorse),
the double-phase densities, and an end-to-end energy + residual assembly,
then a full Luxemburg norm.  Run as:

    python benchmarks/bench_kernels.py [--sizes 201,4001,40401]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dphase import _pycore

try:
    from dphase import _core
except ImportError:
    _core = None


def _bench(fn, *args, repeat=5, number=20):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def bench_kernels(n, rng):
    absu = np.abs(rng.normal(size=n)) * np.exp(rng.uniform(-2, 2, size=n))
    pexp = 2.0 + np.sin(np.linspace(-4, 4, n))
    w = np.exp(-np.linspace(-4, 4, n) ** 2)
    g = np.abs(rng.normal(size=n)) * 2.0
    q = pexp + 0.5

    rows = []
    cases = [
        ("scaled_abs_power_sum", lambda m: m.scaled_abs_power_sum(absu, pexp, 0.7)),
        ("abs_power_sum_weighted", lambda m: m.abs_power_sum_weighted(absu, pexp, w)),
        ("typical_potential", lambda m: m.typical_potential(g, pexp, q)),
        ("typical_flux_factor", lambda m: m.typical_flux_factor(g, pexp, q)),
        ("signed_power", lambda m: m.signed_power(absu, pexp)),
        ("comp_sum", lambda m: m.comp_sum(absu)),
    ]
    for name, call in cases:
        t_py = _bench(call, _pycore)
        t_c = _bench(call, _core) if _core is not None else float("nan")
        rows.append((name, n, t_py, t_c))
    return rows


def bench_high_level(n):
    from dphase.exponents import ExponentField
    from dphase.functional import ProblemSpec, energy, residual
    from dphase.grid import Grid, GridFunction
    from dphase.operator import NonlinearitySpec, PotentialSpec, WeightField
    from dphase.spaces import luxemburg_norm

    grid = Grid(1, 4.0, n)
    c = lambda v: ExponentField.constant(grid, v)
    p = ExponentField.sinusoidal(grid, 2.0, 0.3)
    nl = NonlinearitySpec(lam=1.0, mu=1.0, a_weight=WeightField.gaussian(grid),
                          w_weight=WeightField.gaussian(grid), delta=c(1.5),
                          gamma=c(4.0), theta=3.0)
    prob = ProblemSpec(grid=grid, potential=PotentialSpec("typical", p, c(3.0)),
                       alpha=c(2.0), nonlinearity=nl, s_field=c(3.0),
                       r_field=c(3.0), r_star_field=c(2.0))
    rng = np.random.default_rng(0)
    u = GridFunction(grid, rng.normal(size=grid.interior_shape))

    rows = []
    rows.append(("luxemburg_norm", n, _bench(lambda: luxemburg_norm(u, p),
                                             repeat=3, number=5)))
    rows.append(("energy+residual", n,
                 _bench(lambda: (energy(u, prob), residual(u, prob)),
                        repeat=3, number=5)))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="201,4001,40401")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    if _core is None:
        print("compiled core not available; timing the fallback only\n")

    print(f"{'kernel':28s} {'n':>7s} {'python':>12s} {'compiled':>12s} {'speedup':>8s}")
    for n in sizes:
        for name, n_, t_py, t_c in bench_kernels(n, rng):
            sp = t_py / t_c if t_c == t_c else float("nan")
            print(f"{name:28s} {n_:7d} {t_py * 1e6:10.1f}us {t_c * 1e6:10.1f}us "
                  f"{sp:7.1f}x")
        print()

    print("high-level operations (active backend):")
    for n in (201, 2001):
        for name, n_, t in bench_high_level(n):
            print(f"{name:28s} {n_:7d} {t * 1e3:10.2f}ms")


if __name__ == "__main__":
    main()
