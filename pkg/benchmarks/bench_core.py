"""Compiled core vs numpy fallback on the two hot loops.

    python3 benchmarks/bench_core.py [--repeat 5]

Prints one line per (kernel, size) with the best wall time of each
implementation, their ratio, and the largest output difference.
"""

import argparse
import timeit

import numpy as np

from pidlab import _fallback
from pidlab.dynamics import PIDGains, pid_companion_system
from pidlab.kernel import random_kernel

try:
    from pidlab import _core
except ImportError:
    _core = None


def rk4_case(n, d, n_steps, seed=0):
    rng = np.random.default_rng(seed)
    k = random_kernel(rng, n)
    v0 = rng.standard_normal((n, d))
    gains = PIDGains(0.8, 0.5, 0.05, 0.1)
    m, x0 = pid_companion_system(k, gains, gains.beta * v0, v0)
    c = np.zeros_like(x0)
    return (m, c, x0, 1e-3, n_steps, n_steps, 1e12)


def perron_case(n, seed=0):
    k = random_kernel(np.random.default_rng(seed), n).weights
    return (np.ascontiguousarray(k.T), 1e-14, 100_000)


def best_time(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _core is None:
        print("compiled core not built; nothing to compare")
        return 1

    cases = [("rk4_affine", f"N={n} D={d} steps={s}", rk4_case(n, d, s)) for n, d, s in
             [(4, 2, 20_000), (8, 4, 20_000), (16, 8, 5_000), (64, 16, 1_000)]]
    cases += [("perron_power", f"N={n}", perron_case(n)) for n in (8, 64, 256)]

    print(f"{'kernel':<13} {'case':<24} {'compiled':>10} {'numpy':>10} {'speedup':>8} {'max diff':>9}")
    for name, label, case in cases:
        fast, slow = getattr(_core, name), getattr(_fallback, name)
        t_fast, t_slow = best_time(fast, case, args.repeat), best_time(slow, case, args.repeat)
        diff = float(np.max(np.abs(np.asarray(fast(*case)[0]) - np.asarray(slow(*case)[0]))))
        print(f"{name:<13} {label:<24} {t_fast * 1e3:>8.2f}ms {t_slow * 1e3:>8.2f}ms {t_slow / t_fast:>7.1f}x {diff:>9.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
