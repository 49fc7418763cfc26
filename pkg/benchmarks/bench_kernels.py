"""Timing comparison of the compiled and pure-python kernel backends.

Runs each hot kernel on representative 1D and 2D sizes under both
backends, prints per-call times and the speedup, and verifies on the way
that the two backends return bitwise-identical arrays (they compute the
same IEEE expressions in the same order, so any difference is a bug).

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
from __future__ import annotations

import argparse
import time

import numpy as np


def _load(backend: str):
    import magnetworks._kernels._reference as ref
    if backend == "python":
        return ref
    from magnetworks._kernels import _core
    return _core


def _cases(rng):
    n1 = 200_000
    n2 = 512
    p1 = rng.standard_normal(n1)
    u1 = rng.standard_normal(n1 + 1)
    p2 = rng.standard_normal((n2, n2))
    u2 = rng.standard_normal((n2 + 1, n2))
    v2 = rng.standard_normal((n2, n2 + 1))
    dx, dy = 0.013, 0.017
    return [
        ("gradient_faces_1d", (p1, dx)),
        ("divergence_1d", (u1, dx)),
        ("neg_div_grad_1d", (p1, dx)),
        ("upwind_fluxes_1d", (p1, u1)),
        ("fpe_step_1d", (p1, u1, 0.3, 0.1)),
        ("gradient_faces_2d", (p2, dx, dy)),
        ("divergence_2d", (u2, v2, dx, dy)),
        ("neg_div_grad_2d", (p2, dx, dy)),
        ("upwind_fluxes_2d", (p2, u2, v2)),
        ("fpe_step_2d", (p2, u2, v2, 0.3, 0.2, 0.1, 0.05)),
    ]


def _time(fn, args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _identical(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_identical(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args()

    try:
        compiled = _load("cython")
    except ImportError:
        print("compiled backend not available; install with the extension built")
        return 1
    reference = _load("python")

    rng = np.random.default_rng(20240817)
    cases = _cases(rng)
    width = max(len(name) for name, _ in cases)
    print(f"{'kernel':<{width}}  {'python':>10}  {'compiled':>10}  {'speedup':>8}")
    mismatches = 0
    for name, call_args in cases:
        f_ref = getattr(reference, name)
        f_com = getattr(compiled, name)
        if not _identical(f_ref(*call_args), f_com(*call_args)):
            print(f"{name:<{width}}  BITWISE MISMATCH")
            mismatches += 1
            continue
        t_ref = _time(f_ref, call_args, args.repeat)
        t_com = _time(f_com, call_args, args.repeat)
        print(f"{name:<{width}}  {t_ref * 1e3:>8.3f}ms  {t_com * 1e3:>8.3f}ms  "
              f"{t_ref / t_com:>7.2f}x")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
